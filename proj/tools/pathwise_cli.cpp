#include <string>
#include <vector>

#include "pathwise/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pathwise::run_cli(args);
}
