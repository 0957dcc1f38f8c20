#include <iostream>

#include "dodewalk/cli.hpp"

int main(int argc, char** argv) {
    return dodewalk::run_cli(argc, argv, std::cout, std::cerr);
}
