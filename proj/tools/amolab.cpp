#include <iostream>

#include "amolab/cli.hpp"

int main(int argc, char** argv) { return amolab::cli::run(argc, argv, std::cout, std::cerr); }
