#include "vwsim/cli.hpp"

int main(int argc, char** argv) { return vwsim::run_cli(argc, argv); }
