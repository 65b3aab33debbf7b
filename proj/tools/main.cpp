#include <iostream>
#include <string>
#include <vector>

#include "loopfield/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return loopfield::cli::dispatch(args, std::cout, std::cerr);
}
