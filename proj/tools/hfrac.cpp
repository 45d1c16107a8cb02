#include <exception>
#include <iostream>

#include "hfrac/cli.hpp"

int main(int argc, char** argv) {
  try {
    return hfrac::cli::run(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
