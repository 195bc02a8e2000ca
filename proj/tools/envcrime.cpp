#include "envcrime/cli.hpp"

int main(int argc, char** argv) { return envcrime::run_cli(argc, argv); }
