#include "biochain/cli.hpp"

int main(int argc, char** argv) { return biochain::cli::run(argc, argv); }
