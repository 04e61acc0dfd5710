// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "nightflare/facade.hpp"

int main(int argc, char** argv)
{
    return nightflare::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
