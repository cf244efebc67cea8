#include <iostream>
#include <string>
#include <vector>

#include "bellint/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bellint::cli::run(args, std::cout, std::cerr);
}
