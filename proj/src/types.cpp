#include "sbdp/types.hpp"

namespace sbdp {

namespace {
const char* kind_names[] = {
    "dimension_mismatch",   "invalid_neighbor",       "invalid_graph",
    "unsupported_structure", "infeasible_subproblem", "stalled",
    "evaluation_error",     "singular_matrix",        "strict_complementarity",
    "oracle_unavailable",   "invalid_parameter",      "unknown_benchmark",
    "not_converged",        "config_error",
};
}  // namespace

const char* to_string(ErrorKind kind) { return kind_names[static_cast<int>(kind)]; }

Error::Error(ErrorKind kind, const std::string& message, int agent, std::string field)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind), message_(message), agent_(agent), field_(std::move(field)) {}

}  // namespace sbdp
