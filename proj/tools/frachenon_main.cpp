#include <iostream>

#include "frachenon/cli.hpp"

int main(int argc, char** argv) { return frachenon::cli::run(argc, argv, std::cout, std::cerr); }
