#include <vector>

#include "gsim/cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gsim::cli::dispatch(args);
}
