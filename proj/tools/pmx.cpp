#include "pmx/cli.hpp"

int main(int argc, char** argv) { return pmx::cli::run(argc, argv); }
