#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbdp/problem.hpp"

namespace sbdp {

double local_lagrangian(const PartitionedNlp& nlp, int i, const PrimalDualPoint& point);

/// grad_{x_j} L_i from agent i's full argument list.
Vec general_sensitivity(const PartitionedNlp& nlp, int i, int j,
                        const PrimalDualPoint& point);

/// grad_{x_j} (f_ij + lambda_i'g_ij + mu_i'h_ij); reads only x_i, x_j, lambda_i, mu_i.
Vec neighbor_affine_sensitivity(const PartitionedNlp& nlp, int i, int j,
                                const PrimalDualPoint& point);

/// Stacked [grad_{x_i} L; g_i; diag(mu_i) h_i] per agent, where grad_{x_i} L is
/// the central Lagrangian gradient (own term plus all dependents' terms).
Vec central_kkt_residual(const PartitionedNlp& nlp, const PrimalDualPoint& point);

/// Infinity norm of the full KKT violation including h <= 0 and mu >= 0.
double central_kkt_error(const PartitionedNlp& nlp, const PrimalDualPoint& point);

enum class CheckStatus { pass, warn, fail };
const char* to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double max_deviation = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool passed() const;  // no check failed (warnings allowed)
  const CheckResult* find(const std::string& name) const;
};

struct ValidationOptions {
  int sample_points = 20;
  double sample_scale = 1.0;  // points drawn uniformly in [-scale, scale] around center
  double derivative_tolerance = 1e-5;
  double affine_tolerance = 1e-8;
  std::uint64_t seed = 1;
  /// Optional center for sampling (e.g. a benchmark's initial point).
  std::optional<PrimalDualPoint> center;
};

ValidationReport validate_partition(const PartitionedNlp& nlp,
                                    const ValidationOptions& options = {});

}  // namespace sbdp
