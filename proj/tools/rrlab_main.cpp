#include "rrlab/cli.hpp"

int main(int argc, char** argv) { return rrlab::run_cli(argc, argv); }
