#include <iostream>

#include "hnhpp/commands.hpp"

int main(int argc, char** argv)
{
    return hnhpp::run_cli(argc, argv, std::cout, std::cerr);
}
