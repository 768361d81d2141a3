#include "pimrl/cli.hpp"

int main(int argc, char** argv) { return pimrl::run_cli(argc, argv); }
