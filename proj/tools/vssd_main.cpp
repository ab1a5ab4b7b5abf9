#include <iostream>

#include "vssd/cli.hpp"

int main(int argc, char** argv) {
  return vssd::run_cli(argc, argv, std::cout, std::cerr);
}
