#include <iostream>

#include "formpc/cli.h"

int main(int argc, char** argv) {
  return formpc::cli::main(argc, argv, std::cout, std::cerr);
}
