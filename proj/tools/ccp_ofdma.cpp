#include "ccofdma/cli.hpp"

int main(int argc, char** argv) { return ccofdma::dispatch(argc, argv); }
