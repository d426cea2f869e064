#include "glossmap/cli.hpp"

int main(int argc, char** argv) { return glossmap::cli::run(argc, argv); }
