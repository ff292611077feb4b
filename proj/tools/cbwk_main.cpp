#include "cbwk/cli.hpp"

int main(int argc, char **argv) { return cbwk::run_cli(argc, argv); }
