#include <string>
#include <vector>

#include "samrf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return samrf::cli::run(args);
}
