#include <iostream>

#include "srcvul_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return srcvul::cli::run(args, std::cout, std::cerr);
}
