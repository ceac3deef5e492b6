#include <iostream>
#include <string>
#include <vector>

#include "dirac_billiard/cli_io.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return dirac_billiard::cli::main_entry(args, std::cout, std::cerr);
}
