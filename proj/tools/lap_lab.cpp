#include "laplab/cli.hpp"

int main(int argc, char** argv) { return laplab::cli::main_entry(argc, argv); }
