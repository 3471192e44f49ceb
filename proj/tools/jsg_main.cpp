#include <iostream>

#include "jsg/commands.hpp"

int main(int argc, char** argv) {
  return jsg::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
