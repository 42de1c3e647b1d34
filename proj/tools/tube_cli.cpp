#include "tube/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return tube::run(argc, argv, std::cout, std::cerr);
}
