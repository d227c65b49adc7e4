#include <iostream>

#include "betalab/runner.hpp"

int main(int argc, char** argv) { return betalab::run_cli(argc, argv, std::cout, std::cerr); }
