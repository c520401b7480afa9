#include "lergo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lergo::cli::main_entry(argc, argv, std::cout, std::cerr); }
