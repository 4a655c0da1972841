#pragma once

#include <string>
#include <vector>

namespace fleetroll {

/// Entry point of the `fleetroll` tool. Returns the process exit code.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);  // args exclude the program name

}  // namespace fleetroll
