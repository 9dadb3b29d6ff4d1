#include "sensegen/cli.hpp"

int main(int argc, char** argv) { return sensegen::run_cli(argc, argv); }
