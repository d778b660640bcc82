#include <iostream>

#include "ddsdp/cli.hpp"

int main(int argc, char** argv) { return ddsdp::cli::run(argc, argv, std::cout, std::cerr); }
