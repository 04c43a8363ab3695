#include "radplan/cli.hpp"

int main(int argc, char** argv) { return radplan::cli::run(argc, argv); }
