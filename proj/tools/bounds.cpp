#include <iostream>

#include "srnbound/cli_runner.hpp"

int main(int argc, char** argv) { return srnbound::run_cli(argc, argv, std::cout, std::cerr); }
