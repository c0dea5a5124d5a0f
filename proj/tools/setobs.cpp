#include "setobs/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return setobs::cli::run_cli(argc, argv, std::cout, std::cerr); }
