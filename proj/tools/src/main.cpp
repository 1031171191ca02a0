#include "spca_cli/commands.hpp"

int main(int argc, char** argv) { return spca::cli::run(argc, argv); }
