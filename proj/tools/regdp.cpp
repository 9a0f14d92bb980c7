#include <iostream>
#include <string>
#include <vector>

#include "regdp/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return regdp::run_cli(args, std::cout, std::cerr);
}
