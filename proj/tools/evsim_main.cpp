#include <iostream>

#include "evsim/cli.hpp"

int main(int argc, char** argv) { return evsim::cli::run(argc, argv, std::cout, std::cerr); }
