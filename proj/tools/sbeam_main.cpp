#include "sbeam/harness.hpp"

int main(int argc, char** argv) { return sbeam::run_cli(argc, argv); }
