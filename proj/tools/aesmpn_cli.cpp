// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "aesmpn/cli/commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return aesmpn::cli::run(args, std::cout, std::cerr);
}
