#include "llob/cli.hpp"

int main(int argc, char** argv) {
    return llob::cli::run(argc, argv);
}
