#include "cccpde/cli.hpp"

int main(int argc, char** argv) { return cccpde::cli::run(argc, argv); }
