#include <iostream>

#include "neumann_layers/cli.hpp"

int main(int argc, char** argv) { return nlayers::run_cli(argc, argv, std::cout, std::cerr); }
