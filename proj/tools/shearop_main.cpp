#include <iostream>
#include <string>
#include <vector>

#include "shearop/pipeline.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return shearop::run_cli(args, std::cout, std::cerr);
}
