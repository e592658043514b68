#include "overtake/cli.hpp"

int main(int argc, char** argv) { return overtake::run_cli(argc, argv); }
