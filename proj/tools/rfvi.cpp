#include "rfvi/cli.hpp"

int main(int argc, char** argv) { return rfvi::cli::run(argc, argv); }
