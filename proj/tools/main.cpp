#include "cli.hpp"

int main(int argc, char** argv) { return iterlara::cli::run_cli(argc, argv); }
