#include <iostream>
#include <string>
#include <vector>

#include "routing/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return routing::run_cli(args, std::cout, std::cerr);
}
