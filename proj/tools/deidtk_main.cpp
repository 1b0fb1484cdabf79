#include <string>
#include <vector>

#include "deid/cli.hpp"

int main(int argc, char** argv) {
    return deid::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
