#include <string>
#include <vector>

#include "arena/harness.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return arena::run_cli(args);
}
