#include "grazing/cli.hpp"

int main(int argc, char** argv) { return grazing::run_cli(argc, argv); }
