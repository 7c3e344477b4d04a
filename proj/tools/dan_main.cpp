#include "dan/cli.hpp"

int main(int argc, char** argv) { return dan::run_cli(argc, argv); }
