#include <iostream>

#include "doqos/cli.hpp"

int main(int argc, char** argv) {
  return doqos::cli::run(argc, argv, std::cout, std::cerr);
}
