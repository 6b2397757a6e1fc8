#include <string>
#include <vector>

#include "irpp/harness.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return irpp::run_cli(args);
}
