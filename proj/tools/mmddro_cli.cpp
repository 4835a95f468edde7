#include "mmddro/cli.hpp"

int main(int argc, char** argv) { return mmddro::cli_main(argc, argv); }
