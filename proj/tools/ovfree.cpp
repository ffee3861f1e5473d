#include "ovfree/cli.hpp"

int main(int argc, char** argv) { return ovfree::run_cli(argc, argv); }
