#include <iostream>

#include "ohseg/cli.hpp"

int main(int argc, char** argv) {
  return ohseg::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
