#include <iostream>

#include "opmm/cli.hpp"

int main(int argc, char** argv) { return opmm::run_cli(argc, argv, std::cout, std::cerr); }
