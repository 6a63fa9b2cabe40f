#include <iostream>

#include "rootpeel/cli.hpp"

int main(int argc, char** argv) { return rootpeel::cli::run_cli(argc, argv, std::cout, std::cerr); }
