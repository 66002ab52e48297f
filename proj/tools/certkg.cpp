#include "certkg/service/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return certkg::service::run_cli(argc, argv, std::cout, std::cerr); }
