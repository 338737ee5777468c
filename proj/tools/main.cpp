#include <vector>

#include "kaidoa/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kaidoa::cli_main(args);
}
