#include <iostream>

#include "svlaser/cli.hpp"

int main(int argc, char** argv) { return svl::cli_main(argc, argv, std::cout, std::cerr); }
