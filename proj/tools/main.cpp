#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
    auto parsed = mflq::cli::parse_command_line(argc, argv, std::cout, std::cerr);
    if (!parsed.config) return parsed.exit_code;
    return mflq::cli::run(*parsed.config, std::cin, std::cout, std::cerr);
}
