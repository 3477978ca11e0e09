#include <string>
#include <vector>

#include "dcsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dcsim::run_command(args);
}
