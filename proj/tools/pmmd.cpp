#include "pmmd/cli/commands.hpp"

int main(int argc, char** argv) { return pmmd::cli::run(argc, argv); }
