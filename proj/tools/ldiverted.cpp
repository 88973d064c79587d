#include "ldiverted/cli.hpp"

int main(int argc, char** argv) { return ldiverted::cli_main(argc, argv); }
