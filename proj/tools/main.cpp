#include "cli.hpp"

int main(int argc, char** argv) { return mirror_agg::cli::main_entry(argc, argv); }
