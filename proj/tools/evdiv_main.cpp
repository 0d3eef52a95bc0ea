#include "evdiv/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return evdiv::run_cli(argc, argv, std::cout, std::cerr); }
