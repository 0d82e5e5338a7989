#include <iostream>
#include <string>
#include <vector>

#include "tvf/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tvf::app::run_cli(args, std::cout, std::cerr);
}
