#include "sbdp/problem.hpp"

namespace sbdp {

bool NeighborAffineFunctions::equality_coupled() const {
  for (const auto& p : pairs)
    if (p.equality) return true;
  return false;
}

bool NeighborAffineFunctions::inequality_coupled() const {
  for (const auto& p : pairs)
    if (p.inequality) return true;
  return false;
}

int PartitionedNlp::primal_size() const {
  int n = 0;
  for (const auto& a : agents) n += a.n;
  return n;
}

int PartitionedNlp::stacked_size() const {
  int n = 0;
  for (int i = 0; i < agent_count(); ++i) n += block_size(i);
  return n;
}

int PartitionedNlp::offset(int i) const {
  int off = 0;
  for (int k = 0; k < i; ++k) off += block_size(k);
  return off;
}

void PartitionedNlp::check_structure() const {
  const int M = graph.agent_count();
  if (static_cast<int>(agents.size()) != M)
    throw Error(ErrorKind::dimension_mismatch, "agents list length differs from graph size");
  for (int i = 0; i < M; ++i) {
    const auto& a = agents[i];
    if (a.n < 1) throw Error(ErrorKind::dimension_mismatch, "n_i must be positive", i, "n");
    if (a.n_eq < 0 || a.n_ineq < 0)
      throw Error(ErrorKind::dimension_mismatch, "negative constraint count", i);
    if (!a.objective) throw Error(ErrorKind::unsupported_structure, "missing objective", i, "f");
    if (a.n_eq > 0 && !a.equality)
      throw Error(ErrorKind::unsupported_structure, "missing equality callable", i, "g");
    if (a.n_ineq > 0 && !a.inequality)
      throw Error(ErrorKind::unsupported_structure, "missing inequality callable", i, "h");
  }
  if (affine_form) {
    if (static_cast<int>(affine_form->size()) != M)
      throw Error(ErrorKind::dimension_mismatch, "affine_form length differs from graph size");
    for (int i = 0; i < M; ++i)
      if ((*affine_form)[i].pairs.size() != graph.neighbors(i).size())
        throw Error(ErrorKind::dimension_mismatch,
                    "affine_form pair count differs from |N_i|", i, "pairs");
  }
}

PrimalDualPoint PrimalDualPoint::zeros(const PartitionedNlp& nlp) {
  PrimalDualPoint p;
  for (const auto& a : nlp.agents)
    p.agents.push_back({Vec::Zero(a.n), Vec::Zero(a.n_eq), Vec::Zero(a.n_ineq)});
  return p;
}

PrimalDualPoint PrimalDualPoint::from_stacked(const PartitionedNlp& nlp, const Vec& v) {
  if (v.size() != nlp.stacked_size())
    throw Error(ErrorKind::dimension_mismatch, "stacked vector has wrong length");
  PrimalDualPoint p;
  int off = 0;
  for (const auto& a : nlp.agents) {
    AgentPoint ap;
    ap.x = v.segment(off, a.n);
    off += a.n;
    ap.lambda = v.segment(off, a.n_eq);
    off += a.n_eq;
    ap.mu = v.segment(off, a.n_ineq);
    off += a.n_ineq;
    p.agents.push_back(std::move(ap));
  }
  return p;
}

Vec PrimalDualPoint::stacked() const {
  int total = 0;
  for (const auto& a : agents) total += a.size();
  Vec v(total);
  int off = 0;
  for (const auto& a : agents) {
    v.segment(off, a.x.size()) = a.x;
    off += static_cast<int>(a.x.size());
    v.segment(off, a.lambda.size()) = a.lambda;
    off += static_cast<int>(a.lambda.size());
    v.segment(off, a.mu.size()) = a.mu;
    off += static_cast<int>(a.mu.size());
  }
  return v;
}

Vec PrimalDualPoint::primal() const {
  int total = 0;
  for (const auto& a : agents) total += static_cast<int>(a.x.size());
  Vec v(total);
  int off = 0;
  for (const auto& a : agents) {
    v.segment(off, a.x.size()) = a.x;
    off += static_cast<int>(a.x.size());
  }
  return v;
}

void PrimalDualPoint::check_dimensions(const PartitionedNlp& nlp) const {
  if (static_cast<int>(agents.size()) != nlp.agent_count())
    throw Error(ErrorKind::dimension_mismatch, "point has wrong number of agents");
  for (int i = 0; i < nlp.agent_count(); ++i) {
    const auto& a = nlp.agents[i];
    if (agents[i].x.size() != a.n)
      throw Error(ErrorKind::dimension_mismatch, "x has wrong length", i, "x");
    if (agents[i].lambda.size() != a.n_eq)
      throw Error(ErrorKind::dimension_mismatch, "lambda has wrong length", i, "lambda");
    if (agents[i].mu.size() != a.n_ineq)
      throw Error(ErrorKind::dimension_mismatch, "mu has wrong length", i, "mu");
  }
}

Blocks gather_blocks(const PartitionedNlp& nlp, int i, const PrimalDualPoint& point) {
  Blocks b;
  b.reserve(nlp.graph.neighbors(i).size() + 1);
  b.push_back(point.agents[i].x);
  for (int j : nlp.graph.neighbors(i)) b.push_back(point.agents[j].x);
  return b;
}

}  // namespace sbdp
