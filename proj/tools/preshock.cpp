#include "preshock/cli.hpp"

int main(int argc, char** argv) { return preshock::run_cli(argc, argv); }
