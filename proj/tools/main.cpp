#include "cavsched/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return cavsched::run_cli(argc, argv, std::cout, std::cerr);
}
