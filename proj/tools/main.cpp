#include <iostream>

#include "menger_knots/cli.hpp"

int main(int argc, char** argv) { return menger_knots::run_cli(argc, argv, std::cout, std::cerr); }
