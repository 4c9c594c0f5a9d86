#include <iostream>

#include "tsfeat/cli.hpp"

int main(int argc, char** argv) { return tsfeat::cli::run(argc, argv, std::cout, std::cerr); }
