#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return salflow::cli::dispatch({argv + 1, argv + argc}, std::cout, std::cerr);
}
