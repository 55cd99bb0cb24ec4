#include <iostream>

#include "sfh/cli.hpp"

int main(int argc, char** argv) { return sfh::run_cli(argc, argv, std::cout, std::cerr); }
