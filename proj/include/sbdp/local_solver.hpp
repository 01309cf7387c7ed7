#pragma once

#include <vector>

#include "sbdp/problem.hpp"
#include "sbdp/sqp.hpp"

namespace sbdp {

struct LocalProblemInstance {
  int agent = 0;
  std::vector<Vec> neighbor_x;  // frozen x_j^{q-1}, ordered as N_i
  Vec sensitivity_sum;          // sum_{k: i in N_k} grad_{x_i} L_k^{q-1}
  Vec anchor;                   // x_i^{q-1}
  AgentPoint warm_start;
  std::vector<int> warm_active;

  /// Throws a dimension error naming the agent and field on mismatch.
  void validate(const PartitionedNlp& nlp) const;
};

struct LocalSolveResult {
  AgentPoint point;
  SqpStatus status = SqpStatus::max_iterations;
  int iterations = 0;
  double kkt_residual = 0.0;
  std::vector<int> active;
};

LocalSolveResult solve_local_nlp(const PartitionedNlp& nlp, const LocalProblemInstance& instance,
                                 const SolverSettings& settings);

/// Infinity norm of the local KKT conditions of the modified local NLP.
double local_kkt_residual(const PartitionedNlp& nlp, const LocalProblemInstance& instance,
                          const AgentPoint& candidate);

/// Minimizes the central NLP with the same SQP (all agents as one).
/// A run that stalls is still accepted when its final residual is at most
/// accept_tolerance (roundoff floors on problems with large multipliers).
/// Throws Error{not_converged} carrying the residual history on failure.
PrimalDualPoint solve_central(const PartitionedNlp& nlp, const PrimalDualPoint& start,
                              const SolverSettings& settings = {},
                              double accept_tolerance = 0.0);

}  // namespace sbdp
