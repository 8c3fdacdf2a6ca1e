#include <iostream>

#include "mtlc/cli.hpp"

int main(int argc, char **argv) { return mtlc::run_cli(argc, argv, std::cout, std::cerr); }
