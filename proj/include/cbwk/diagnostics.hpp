#pragma once

#include <string_view>

namespace cbwk::diag {

/// Writes a one-line warning to stderr unless warnings are muted.
void warn(std::string_view msg);

void set_muted(bool muted);
bool muted();

} // namespace cbwk::diag
