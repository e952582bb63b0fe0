#include "cli.hpp"

int main(int argc, char** argv) { return pinaudio::cli::run_cli(argc, argv); }
