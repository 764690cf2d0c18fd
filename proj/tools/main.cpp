#include "uhl/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return uhl::run_cli(argc, argv, std::cout, std::cerr);
}
