#include "gssl/cli/app.hpp"

int main(int argc, char** argv) { return gssl::cli::run(argc, argv); }
