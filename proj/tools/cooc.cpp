#include <iostream>

#include "cooc/cli.hpp"

int main(int argc, char** argv) { return cooc::run_cli(argc, argv, std::cout, std::cerr); }
