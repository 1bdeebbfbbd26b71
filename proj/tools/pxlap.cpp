#include <iostream>

#include "pxlap/cli.hpp"

int main(int argc, char** argv) { return pxlap::run(argc, argv, std::cout, std::cerr); }
