#include <iostream>
#include <string>
#include <vector>

#include "mvne/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return mvne::cli::run(args, std::cout, std::cerr);
}
