//
//  main.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return classroom::cli::run_cli(argc, argv, std::cout, std::cerr); }
