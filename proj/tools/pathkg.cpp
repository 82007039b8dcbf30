#include "pathkg/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pathkg::cli::run_command(std::move(args));
}
