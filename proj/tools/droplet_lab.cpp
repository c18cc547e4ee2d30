#include "droplet/cli/run.hpp"

int main(int argc, char** argv) { return droplet::cli::run(argc, argv); }
