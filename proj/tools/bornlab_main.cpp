#include "bornlab/cli.hpp"

int main(int argc, char** argv) { return bornlab::cli::run(argc, argv); }
