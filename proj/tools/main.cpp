#include <iostream>
#include <string>
#include <vector>

#include "ooprompt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ooprompt::cli_dispatch(args, std::cin, std::cout, std::cerr);
}
