#include <iostream>

#include "revrl/cli.hpp"

int main(int argc, char** argv) { return revrl::run_cli(argc, argv, std::cout, std::cerr); }
