#include <iostream>
#include <string>
#include <vector>

#include "ebbm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ebbm::run_cli(args, std::cout, std::cerr);
}
