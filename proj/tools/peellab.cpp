#include "peellab/cli_reports.hpp"

int main(int argc, char** argv) { return peellab::cli_dispatch(argc, argv); }
