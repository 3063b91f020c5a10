#include "stratexp/cli.hpp"

int main(int argc, char** argv) { return stratexp::cli_dispatch(argc, argv); }
