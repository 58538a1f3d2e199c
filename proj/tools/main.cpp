#include <string>
#include <vector>

#include "affsr/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return affsr::cli_main(args);
}
