#include <iostream>

#include "iris/cli.hpp"

int main(int argc, char** argv) { return iris::cli_dispatch(argc, argv, std::cout, std::cerr); }
