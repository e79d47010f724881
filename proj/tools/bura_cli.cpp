#include "bura/experiments.hpp"

int main(int argc, char** argv) { return bura::cli_dispatch(argc, argv); }
