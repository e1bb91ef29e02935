#include "affine/cli.hpp"

int main(int argc, char** argv) { return affine::run(argc, argv); }
