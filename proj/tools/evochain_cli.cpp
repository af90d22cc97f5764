#include "evochain/bench.hpp"

int main(int argc, char** argv) { return evochain::cli_main(argc, argv); }
