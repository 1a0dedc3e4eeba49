#include <cstdio>
#include <cstring>

#include "qlmass/cli.hpp"

static int usage() {
    std::fprintf(stderr,
                 "usage:\n"
                 "  qlmass run <config>   evaluate scenarios, write artifacts\n"
                 "  qlmass report <dir>   render the margin matrix from artifacts\n");
    return 2;
}

int main(int argc, char** argv) {
    if (argc != 3) return usage();
    if (std::strcmp(argv[1], "run") == 0) return qlm::cli::run_file(argv[2]);
    if (std::strcmp(argv[1], "report") == 0) return qlm::cli::report(argv[2]);
    return usage();
}
