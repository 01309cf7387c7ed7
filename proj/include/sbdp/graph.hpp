#pragma once

#include <vector>

namespace sbdp {

/// Directed coupling graph over agents 0..M-1. neighbors(i) is the ordered set
/// N_i of agents whose variables enter agent i's functions; dependents(i) is
/// the reverse adjacency {k : i in N_k}, also in ascending order.
class CouplingGraph {
 public:
  CouplingGraph() = default;
  explicit CouplingGraph(std::vector<std::vector<int>> neighbors);

  int agent_count() const { return static_cast<int>(neighbors_.size()); }
  const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
  const std::vector<int>& dependents(int i) const { return dependents_[i]; }

  /// Position of j inside N_i, or -1 when j is not a neighbor of i.
  int slot(int i, int j) const;
  bool has_edge(int i, int j) const { return slot(i, j) >= 0; }
  bool symmetric() const;

  /// Ring where each agent couples to all agents within `hops` steps.
  static CouplingGraph ring(int agents, int hops);
  /// Path 0 - 1 - ... - M-1.
  static CouplingGraph chain(int agents);
  static CouplingGraph empty(int agents);

 private:
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> dependents_;
};

}  // namespace sbdp
