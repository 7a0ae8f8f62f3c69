#include "hybridzoom/cli.hpp"

int main(int argc, char** argv) { return hz::cli_main(argc, argv); }
