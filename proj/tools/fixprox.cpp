#include <iostream>

#include "fixprox/cli.hpp"

int main(int argc, char** argv) { return fixprox::cli::run(argc, argv, std::cout, std::cerr); }
