#include "tdem/cli.hpp"

int main(int argc, char** argv) { return tdem::run_cli(argc, argv); }
