#pragma once

namespace cbwk {

/// Subcommands run, opt, table and selftest. Returns 0 on success, 1 on a
/// usage error, 2 on a runtime failure.
int run_cli(int argc, char **argv);

} // namespace cbwk
