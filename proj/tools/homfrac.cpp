#include "cli/run.hpp"

int main(int argc, char** argv) { return homfrac::cli::run(argc, argv); }
