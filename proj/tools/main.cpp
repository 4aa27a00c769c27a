#include <vector>

#include "vinet/cli.hpp"

int main(int argc, char** argv) {
  return vinet::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
