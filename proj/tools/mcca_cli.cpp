#include "mcca/cli.hpp"

int main(int argc, char** argv) { return mcca::cli::run(argc, argv); }
