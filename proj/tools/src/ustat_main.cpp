#include <iostream>
#include <string>
#include <vector>

#include "ustat_cli/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return ustat::cli::run(args, std::cout, std::cerr);
}
