#include <iostream>

#include "numgame/cli.hpp"

int main(int argc, char** argv) { return numgame::run_cli(argc, argv, std::cout, std::cerr); }
