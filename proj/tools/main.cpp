#include "pwl/commands.hpp"

int main(int argc, char** argv) { return pwl::cli::run(argc, argv); }
