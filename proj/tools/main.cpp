#include <iostream>

#include "paretoscl/cli.hpp"

int main(int argc, char** argv) { return paretoscl::run_cli(argc, argv, std::cout, std::cerr); }
