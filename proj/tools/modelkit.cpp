#include <iostream>
#include <string>
#include <vector>

#include "modelkit/runner.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return modelkit::cli_main(args, std::cout, std::cerr);
}
