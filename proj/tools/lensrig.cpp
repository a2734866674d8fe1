#include "lensrig/cli.hpp"

int main(int argc, char** argv) { return lensrig::run_cli(argc, argv); }
