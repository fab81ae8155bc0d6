#include <iostream>
#include <string>
#include <vector>

#include "ultrav/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return ultrav::cli::run(args, std::cout, std::cerr);
}
