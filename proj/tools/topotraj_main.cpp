#include "topotraj/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return topotraj::cli::run(argc, argv, std::cout, std::cerr); }
