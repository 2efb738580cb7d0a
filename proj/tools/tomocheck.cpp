#include <string>
#include <vector>

#include "tomocheck/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return tomocheck::cli::run(args);
}
