#include <iostream>

#include "zenoreach/cli.hpp"

int main(int argc, char** argv) { return zenoreach::run_cli(argc, argv, std::cout, std::cerr); }
