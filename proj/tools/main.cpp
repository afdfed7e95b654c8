#include <iostream>

#include "sl/cli.hpp"

int main(int argc, char** argv) {
  return sl::cli_main(argc, argv, std::cout, std::cerr);
}
