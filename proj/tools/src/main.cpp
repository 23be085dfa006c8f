#include <iostream>

#include "monarch_cli/commands.hpp"

int main(int argc, char** argv) { return monarch::cli::run(argc, argv, std::cout, std::cerr); }
