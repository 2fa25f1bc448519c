#include <iostream>
#include <string>
#include <vector>

#include "aerial/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return aerial::run_cli(args, std::cout, std::cerr);
}
