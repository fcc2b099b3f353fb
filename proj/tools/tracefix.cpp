#include <iostream>

#include "tracefix/cli.hpp"

int main(int argc, char** argv) { return tracefix::cli::run(argc, argv, std::cout, std::cerr); }
