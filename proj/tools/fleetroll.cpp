#include "fleetroll/cli.hpp"

int main(int argc, char** argv) { return fleetroll::run_cli(argc, argv); }
