#include "mtreg/cli.hpp"

int main(int argc, char** argv) { return mtreg::cli::run_cli(argc, argv); }
