#include <iostream>

#include "experiments.hpp"

int main(int argc, char** argv) { return ndlab::cli::run_cli(argc, argv, std::cout, std::cerr); }
