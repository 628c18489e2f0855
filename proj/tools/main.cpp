#include <iostream>

#include "parahom/cli.hpp"

int main(int argc, char** argv) { return parahom::run_cli(argc, argv, std::cout, std::cerr); }
