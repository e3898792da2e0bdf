#include <iostream>

#include "wfforge/cli.hpp"

int main(int argc, char** argv) {
    return wfforge::cli::taskbench_main({argv, argv + argc}, std::cout, std::cerr);
}
