#include <iostream>

#include "wfforge/cli.hpp"

int main(int argc, char** argv) {
    return wfforge::cli::wfforge_main({argv, argv + argc}, std::cout, std::cerr);
}
