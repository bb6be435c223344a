#include <iostream>

#include "ftme/cli.hpp"

int main(int argc, char** argv)
{
    return ftme::cli::run(argc, argv, std::cout, std::cerr);
}
