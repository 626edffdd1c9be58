#include <rsph/io/cli.hpp>

int main(int argc, char** argv) { return rsph::io::cli_main(argc, argv); }
