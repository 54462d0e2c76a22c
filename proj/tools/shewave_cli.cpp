#include "shewave/cli.hpp"

int main(int argc, char** argv) { return shewave::run_cli(argc, argv); }
