#include "netfolio/cli.hpp"

int main(int argc, char** argv) { return netfolio::cli::run(argc, argv); }
