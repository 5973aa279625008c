#include <iostream>

#include "neuroquery/cli.hpp"

int main(int argc, char** argv) {
  return neuroquery::run_cli(argc, argv, std::cin, std::cout, std::cerr);
}
