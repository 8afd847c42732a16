#include <iostream>
#include <string>
#include <vector>

#include "pwrctl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pwrctl::run_cli(args, std::cout, std::cerr);
}
