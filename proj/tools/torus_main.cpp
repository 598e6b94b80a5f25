#include "torus/harness.hpp"

int main(int argc, char** argv) { return torus::cli(argc, argv); }
