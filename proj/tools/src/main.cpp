#include <iostream>

#include "dqa/cli/commands.hpp"

int main(int argc, char** argv) { return dqa::cli::run_cli(argc, argv, std::cout, std::cerr); }
