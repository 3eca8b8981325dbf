#include <vector>

#include "threadlab/cli.hpp"

int main(int argc, char** argv) {
  return threadlab::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
