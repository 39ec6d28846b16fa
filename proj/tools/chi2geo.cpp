#include "chi2geo/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::optional<std::string> generator;
  if (const char* env = std::getenv("CHI2GEO_GENERATOR")) {
    generator = env;
  }
  return chi2geo::cli::run(args, std::cin, std::cout, std::cerr, generator);
}
