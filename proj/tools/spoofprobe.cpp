#include <iostream>

#include "spoofprobe/cli.hpp"

int main(int argc, char** argv) { return spoofprobe::run_cli(argc, argv, std::cout, std::cerr); }
