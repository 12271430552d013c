#include <iostream>
#include <string>
#include <vector>

#include "functest/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return functest::cli::run(args, std::cout, std::cerr);
}
