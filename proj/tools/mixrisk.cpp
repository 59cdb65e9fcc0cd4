#include <iostream>

#include "mixrisk/cli.hpp"

int main(int argc, char** argv) { return mixrisk::cli_main(argc, argv, std::cout, std::cerr); }
