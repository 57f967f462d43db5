#include <iostream>

#include "mmhdc/harness.hpp"

int main(int argc, char** argv) { return mmhdc::run_cli(argc, argv, std::cout, std::cerr); }
