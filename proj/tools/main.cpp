#include <iostream>
#include <string>
#include <vector>

#include "vf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return vf::run_cli(args, std::cout, std::cerr);
}
