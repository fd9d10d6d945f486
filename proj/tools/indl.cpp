#include <iostream>

#include "indl/cli.hpp"

int main(int argc, char** argv) { return indl::run(argc, argv, std::cout, std::cerr); }
