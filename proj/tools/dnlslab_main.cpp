#include <iostream>
#include <string>
#include <vector>

#include "dnls/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dnls::run_cli(args, std::cout, std::cerr);
}
