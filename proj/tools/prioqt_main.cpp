#include "prioqt/cli.hpp"

int main(int argc, char** argv) { return prioqt::cli::run_cli(argc, argv); }
