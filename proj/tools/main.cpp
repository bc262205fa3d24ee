#include "hdist/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hdist::run_cli(argc, argv, std::cout, std::cerr); }
