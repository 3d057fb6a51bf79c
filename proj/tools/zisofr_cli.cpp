#include <iostream>

#include "zisofr/cli.hpp"

int main(int argc, char** argv) { return zisofr::io::run_cli(argc, argv, std::cout, std::cerr); }
