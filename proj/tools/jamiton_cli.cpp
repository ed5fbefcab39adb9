#include "jamiton/cli.hpp"

int main(int argc, char** argv) { return jamiton::io::cli_dispatch(argc, argv); }
