#include "aomsda/cli.hpp"

int main(int argc, char** argv) {
    return aomsda::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
