#include "mfeit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mfeit::run_cli(argc, argv, std::cout, std::cerr); }
