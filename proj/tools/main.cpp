#include "simgen/cli.hpp"

int main(int argc, char** argv) { return simgen::cli::dispatch(argc, argv); }
