#include "cli.hpp"

int main(int argc, char** argv) { return gass::cli::run(argc, argv); }
