#include <iostream>

#include "lidardrive/evalharness/cli.hpp"

int main(int argc, char** argv) {
  return lidardrive::evalharness::run_cli(argc, argv, std::cout, std::cerr);
}
