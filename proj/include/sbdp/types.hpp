#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace sbdp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorKind {
  dimension_mismatch,
  invalid_neighbor,
  invalid_graph,
  unsupported_structure,
  infeasible_subproblem,
  stalled,
  evaluation_error,
  singular_matrix,
  strict_complementarity,
  oracle_unavailable,
  invalid_parameter,
  unknown_benchmark,
  not_converged,
  config_error,
};

const char* to_string(ErrorKind kind);

/// Structured error carrying a machine-readable kind plus optional agent and
/// field context. `agent` is -1 when the error is not tied to one agent.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, int agent = -1,
        std::string field = {});

  ErrorKind kind() const { return kind_; }
  /// Message without the kind prefix that what() carries.
  const std::string& message() const { return message_; }
  int agent() const { return agent_; }
  const std::string& field() const { return field_; }

 private:
  ErrorKind kind_;
  std::string message_;
  int agent_;
  std::string field_;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace sbdp
