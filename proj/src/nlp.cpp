#include "sbdp/nlp.hpp"

#include "sbdp/derivatives.hpp"

namespace sbdp {

LocalNlp::LocalNlp(const AgentFunctions& fn, std::vector<Vec> neighbor_x, Vec sensitivity,
                   Vec anchor)
    : fn_(fn), neighbor_x_(std::move(neighbor_x)), s_(std::move(sensitivity)),
      anchor_(std::move(anchor)) {}

Blocks LocalNlp::blocks(const Vec& x) const {
  Blocks b;
  b.reserve(neighbor_x_.size() + 1);
  b.push_back(x);
  for (const auto& v : neighbor_x_) b.push_back(v);
  return b;
}

double LocalNlp::objective(const Vec& x) const {
  return eval_objective(fn_, blocks(x)) + s_.dot(x - anchor_);
}

Vec LocalNlp::gradient(const Vec& x) const { return objective_gradient(fn_, blocks(x), 0) + s_; }

Vec LocalNlp::equality(const Vec& x) const { return eval_equality(fn_, blocks(x)); }

Mat LocalNlp::equality_jacobian(const Vec& x) const {
  return sbdp::equality_jacobian(fn_, blocks(x), 0);
}

Vec LocalNlp::inequality(const Vec& x) const { return eval_inequality(fn_, blocks(x)); }

Mat LocalNlp::inequality_jacobian(const Vec& x) const {
  return sbdp::inequality_jacobian(fn_, blocks(x), 0);
}

Mat LocalNlp::lagrangian_hessian(const Vec& x, const Vec& lambda, const Vec& mu) const {
  return sbdp::lagrangian_hessian(fn_, blocks(x), lambda, mu, 0, 0);
}

CentralNlp::CentralNlp(const PartitionedNlp& nlp) : nlp_(nlp) {
  for (const auto& a : nlp.agents) {
    xo_.push_back(n_);
    go_.push_back(ng_);
    ho_.push_back(nh_);
    n_ += a.n;
    ng_ += a.n_eq;
    nh_ += a.n_ineq;
  }
}

Blocks CentralNlp::blocks(const Vec& x, int i) const {
  Blocks b;
  b.push_back(x.segment(xo_[i], nlp_.agents[i].n));
  for (int j : nlp_.graph.neighbors(i)) b.push_back(x.segment(xo_[j], nlp_.agents[j].n));
  return b;
}

double CentralNlp::objective(const Vec& x) const {
  double f = 0.0;
  for (int i = 0; i < nlp_.agent_count(); ++i) f += eval_objective(nlp_.agents[i], blocks(x, i));
  return f;
}

Vec CentralNlp::gradient(const Vec& x) const {
  Vec g = Vec::Zero(n_);
  for (int i = 0; i < nlp_.agent_count(); ++i) {
    Blocks b = blocks(x, i);
    const auto& nb = nlp_.graph.neighbors(i);
    g.segment(xo_[i], nlp_.agents[i].n) += objective_gradient(nlp_.agents[i], b, 0);
    for (size_t k = 0; k < nb.size(); ++k)
      g.segment(xo_[nb[k]], nlp_.agents[nb[k]].n) +=
          objective_gradient(nlp_.agents[i], b, static_cast<int>(k) + 1);
  }
  return g;
}

Vec CentralNlp::equality(const Vec& x) const {
  Vec g(ng_);
  for (int i = 0; i < nlp_.agent_count(); ++i)
    g.segment(go_[i], nlp_.agents[i].n_eq) = eval_equality(nlp_.agents[i], blocks(x, i));
  return g;
}

Mat CentralNlp::equality_jacobian(const Vec& x) const {
  Mat J = Mat::Zero(ng_, n_);
  for (int i = 0; i < nlp_.agent_count(); ++i) {
    const auto& a = nlp_.agents[i];
    if (a.n_eq == 0) continue;
    Blocks b = blocks(x, i);
    const auto& nb = nlp_.graph.neighbors(i);
    J.block(go_[i], xo_[i], a.n_eq, a.n) = sbdp::equality_jacobian(a, b, 0);
    for (size_t k = 0; k < nb.size(); ++k)
      J.block(go_[i], xo_[nb[k]], a.n_eq, nlp_.agents[nb[k]].n) =
          sbdp::equality_jacobian(a, b, static_cast<int>(k) + 1);
  }
  return J;
}

Vec CentralNlp::inequality(const Vec& x) const {
  Vec h(nh_);
  for (int i = 0; i < nlp_.agent_count(); ++i)
    h.segment(ho_[i], nlp_.agents[i].n_ineq) = eval_inequality(nlp_.agents[i], blocks(x, i));
  return h;
}

Mat CentralNlp::inequality_jacobian(const Vec& x) const {
  Mat J = Mat::Zero(nh_, n_);
  for (int i = 0; i < nlp_.agent_count(); ++i) {
    const auto& a = nlp_.agents[i];
    if (a.n_ineq == 0) continue;
    Blocks b = blocks(x, i);
    const auto& nb = nlp_.graph.neighbors(i);
    J.block(ho_[i], xo_[i], a.n_ineq, a.n) = sbdp::inequality_jacobian(a, b, 0);
    for (size_t k = 0; k < nb.size(); ++k)
      J.block(ho_[i], xo_[nb[k]], a.n_ineq, nlp_.agents[nb[k]].n) =
          sbdp::inequality_jacobian(a, b, static_cast<int>(k) + 1);
  }
  return J;
}

Mat CentralNlp::lagrangian_hessian(const Vec& x, const Vec& lambda, const Vec& mu) const {
  Mat H = Mat::Zero(n_, n_);
  for (int i = 0; i < nlp_.agent_count(); ++i) {
    const auto& a = nlp_.agents[i];
    Blocks b = blocks(x, i);
    Vec li = lambda.segment(go_[i], a.n_eq);
    Vec mi = mu.segment(ho_[i], a.n_ineq);
    std::vector<int> ids{i};
    for (int j : nlp_.graph.neighbors(i)) ids.push_back(j);
    for (size_t r = 0; r < ids.size(); ++r)
      for (size_t c = 0; c < ids.size(); ++c)
        H.block(xo_[ids[r]], xo_[ids[c]], nlp_.agents[ids[r]].n, nlp_.agents[ids[c]].n) +=
            sbdp::lagrangian_hessian(a, b, li, mi, static_cast<int>(r), static_cast<int>(c));
  }
  return H;
}

PrimalDualPoint CentralNlp::to_point(const Vec& x, const Vec& lambda, const Vec& mu) const {
  PrimalDualPoint p;
  for (int i = 0; i < nlp_.agent_count(); ++i) {
    const auto& a = nlp_.agents[i];
    p.agents.push_back({x.segment(xo_[i], a.n), lambda.segment(go_[i], a.n_eq),
                        mu.segment(ho_[i], a.n_ineq)});
  }
  return p;
}

void CentralNlp::from_point(const PrimalDualPoint& p, Vec& x, Vec& lambda, Vec& mu) const {
  x.resize(n_);
  lambda.resize(ng_);
  mu.resize(nh_);
  for (int i = 0; i < nlp_.agent_count(); ++i) {
    const auto& a = nlp_.agents[i];
    x.segment(xo_[i], a.n) = p.agents[i].x;
    lambda.segment(go_[i], a.n_eq) = p.agents[i].lambda;
    mu.segment(ho_[i], a.n_ineq) = p.agents[i].mu;
  }
}

}  // namespace sbdp
