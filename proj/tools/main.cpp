#include "twotier/cli.hpp"

int main(int argc, char** argv) { return twotier::harness::cli_main(argc, argv); }
