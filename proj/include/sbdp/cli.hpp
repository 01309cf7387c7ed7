#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sbdp {

/// Exit codes: 0 success, 1 configuration or runtime error, 2 run ended
/// diverged or at max_iterations, 3 run aborted by a failed local solve.
/// Every invocation leaves a summary.json in the output directory.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sbdp
