#pragma once

#include <string>
#include <vector>

namespace samrf::cli {

// Runs the samrf command line (classify | experiment | filter-classes) and
// returns the process exit code. args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace samrf::cli
