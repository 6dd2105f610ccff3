#include <string>
#include <vector>

#include "klx/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return klx::cli::run(args);
}
