#include <string>
#include <vector>

#include "lc/cli/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lc::cli::dispatch(args);
}
