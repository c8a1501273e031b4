#include "mgt/cli.hpp"

int main(int argc, char** argv) { return mgt::cli::main_entry(argc, argv); }
