#include "sbdp/graph.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "sbdp/types.hpp"

namespace sbdp {

CouplingGraph::CouplingGraph(std::vector<std::vector<int>> neighbors)
    : neighbors_(std::move(neighbors)) {
  const int M = agent_count();
  if (M < 1) throw Error(ErrorKind::invalid_graph, "graph needs at least one agent");
  dependents_.assign(M, {});
  for (int i = 0; i < M; ++i) {
    std::set<int> seen;
    for (int j : neighbors_[i]) {
      if (j < 0 || j >= M)
        throw Error(ErrorKind::invalid_graph,
                    "neighbor index " + std::to_string(j) + " out of range", i);
      if (j == i) throw Error(ErrorKind::invalid_graph, "agent lists itself as neighbor", i);
      if (!seen.insert(j).second)
        throw Error(ErrorKind::invalid_graph, "duplicate neighbor " + std::to_string(j), i);
      dependents_[j].push_back(i);
    }
  }
}

int CouplingGraph::slot(int i, int j) const {
  const auto& n = neighbors_[i];
  auto it = std::find(n.begin(), n.end(), j);
  return it == n.end() ? -1 : static_cast<int>(it - n.begin());
}

bool CouplingGraph::symmetric() const {
  for (int i = 0; i < agent_count(); ++i)
    for (int j : neighbors_[i])
      if (!has_edge(j, i)) return false;
  return true;
}

CouplingGraph CouplingGraph::ring(int agents, int hops) {
  if (agents < 1 || hops < 0)
    throw Error(ErrorKind::invalid_parameter, "ring needs agents >= 1 and hops >= 0");
  std::vector<std::vector<int>> nb(agents);
  for (int i = 0; i < agents; ++i) {
    std::set<int> s;
    for (int h = 1; h <= hops; ++h) {
      s.insert(((i + h) % agents + agents) % agents);
      s.insert(((i - h) % agents + agents) % agents);
    }
    s.erase(i);
    nb[i].assign(s.begin(), s.end());
  }
  return CouplingGraph(std::move(nb));
}

CouplingGraph CouplingGraph::chain(int agents) {
  std::vector<std::vector<int>> nb(agents);
  for (int i = 0; i < agents; ++i) {
    if (i > 0) nb[i].push_back(i - 1);
    if (i + 1 < agents) nb[i].push_back(i + 1);
  }
  return CouplingGraph(std::move(nb));
}

CouplingGraph CouplingGraph::empty(int agents) {
  return CouplingGraph(std::vector<std::vector<int>>(agents));
}

}  // namespace sbdp
