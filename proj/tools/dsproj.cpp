#include <string>
#include <vector>

#include "dsproj/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dsproj::cli::run_cli(std::move(args));
}
