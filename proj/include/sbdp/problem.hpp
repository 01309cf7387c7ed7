#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sbdp/graph.hpp"
#include "sbdp/types.hpp"

namespace sbdp {

/// Argument list of an agent's functions: blocks[0] is x_i, blocks[k] for
/// k >= 1 is x_j of the k-th entry of N_i.
using Blocks = std::vector<Vec>;

/// Per-agent objective and constraint callables. Only the value callables are
/// required; every derivative falls back to central finite differences when
/// left empty. Derivative callables take the block index they differentiate
/// with respect to.
struct AgentFunctions {
  int n = 0;       // n_i
  int n_eq = 0;    // n_gi
  int n_ineq = 0;  // n_hi

  std::function<double(const Blocks&)> objective;
  std::function<Vec(const Blocks&)> equality;    // g_i = 0
  std::function<Vec(const Blocks&)> inequality;  // h_i <= 0

  std::function<Vec(const Blocks&, int)> objective_gradient;
  std::function<Mat(const Blocks&, int)> equality_jacobian;
  std::function<Mat(const Blocks&, int)> inequality_jacobian;
  /// d^2 L_i / d(block a) d(block b) of f_i + lambda'g_i + mu'h_i.
  std::function<Mat(const Blocks&, const Vec& lambda, const Vec& mu, int a, int b)>
      lagrangian_hessian;
};

/// Pairwise coupling terms f_ij, g_ij, h_ij (x_i, x_j). Empty callables mean
/// the term is absent (identically zero).
struct PairTerms {
  std::function<double(const Vec&, const Vec&)> objective;
  std::function<Vec(const Vec&, const Vec&)> equality;
  std::function<Vec(const Vec&, const Vec&)> inequality;

  /// Gradients / Jacobians with respect to the second argument x_j.
  std::function<Vec(const Vec&, const Vec&)> objective_gradient_j;
  std::function<Mat(const Vec&, const Vec&)> equality_jacobian_j;
  std::function<Mat(const Vec&, const Vec&)> inequality_jacobian_j;
};

/// Neighbor-affine split of one agent: local terms plus one PairTerms entry per
/// neighbor, in the order of N_i.
struct NeighborAffineFunctions {
  std::function<double(const Vec&)> objective;
  std::function<Vec(const Vec&)> equality;
  std::function<Vec(const Vec&)> inequality;
  std::vector<PairTerms> pairs;

  bool equality_coupled() const;
  bool inequality_coupled() const;
};

struct PartitionedNlp {
  CouplingGraph graph;
  std::vector<AgentFunctions> agents;
  std::optional<std::vector<NeighborAffineFunctions>> affine_form;

  int agent_count() const { return graph.agent_count(); }
  int primal_size() const;
  int stacked_size() const;
  /// Offset of agent i's block in the stacked p vector.
  int offset(int i) const;
  int block_size(int i) const {
    return agents[i].n + agents[i].n_eq + agents[i].n_ineq;
  }
  /// Throws on structural problems (list lengths, missing callables).
  void check_structure() const;
};

struct AgentPoint {
  Vec x, lambda, mu;
  int size() const {
    return static_cast<int>(x.size() + lambda.size() + mu.size());
  }
};

/// Stacked primal-dual point p = [x_1, lambda_1, mu_1, ..., x_M, lambda_M, mu_M].
struct PrimalDualPoint {
  std::vector<AgentPoint> agents;

  static PrimalDualPoint zeros(const PartitionedNlp& nlp);
  static PrimalDualPoint from_stacked(const PartitionedNlp& nlp, const Vec& p);
  Vec stacked() const;
  Vec primal() const;
  /// Throws a dimension error naming the agent and field on mismatch.
  void check_dimensions(const PartitionedNlp& nlp) const;
};

/// x_i followed by the neighbor variables, read from a full point.
Blocks gather_blocks(const PartitionedNlp& nlp, int i, const PrimalDualPoint& point);

}  // namespace sbdp
