#include "cli/commands.hpp"

int main(int argc, char** argv) { return pgptycho::cli::run_cli(argc, argv); }
