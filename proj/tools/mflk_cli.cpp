#include "mflk/cli.hpp"

int main(int argc, char** argv) { return mflk::cli_main(argc, argv); }
