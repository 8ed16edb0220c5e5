#include "wnlab/cli.hpp"

int main(int argc, char** argv) { return wnlab::cli::run(argc, argv); }
