#include <iostream>
#include <string>
#include <vector>

#include "diraccbd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return diraccbd::cli::run(args, std::cout, std::cerr);
}
