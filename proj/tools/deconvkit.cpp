#include "deconvkit/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return deconvkit::run_cli(argc, argv, std::cout, std::cerr);
}
