#include <expmod/cli.hpp>

int main(int argc, char** argv) { return expmod::run_cli(argc, argv); }
