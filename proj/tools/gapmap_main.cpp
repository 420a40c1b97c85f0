#include <string>
#include <vector>

#include "gapmap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gapmap::run_cli(args);
}
