#include "hdsp/cli.hpp"

int main(int argc, char** argv) { return hdsp::cli::run(argc, argv); }
