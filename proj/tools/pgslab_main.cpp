#include "pgs/cli_io.hpp"

int main(int argc, char** argv) { return pgs::cli::main_entry(argc, argv); }
