#include <iostream>

#include "respec/cli.hpp"

int main(int argc, char** argv) { return respec::cli::run(argc, argv, std::cout, std::cerr); }
