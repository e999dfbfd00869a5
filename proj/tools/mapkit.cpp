#include <iostream>

#include "mapkit/cli.hpp"

int main(int argc, char** argv) { return mapkit::cli::run(argc, argv, std::cout, std::cerr); }
