#include "nestdiag/cli.hpp"

int main(int argc, char** argv) { return nestdiag::cli_main(argc, argv); }
