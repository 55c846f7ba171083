#include <iostream>

#include "faircut/cli.hpp"

int main(int argc, char** argv) { return faircut::cli::run(argc, argv, std::cout, std::cerr); }
