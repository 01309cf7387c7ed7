#include "sbdp/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "sbdp/derivatives.hpp"
#include "sbdp/local_solver.hpp"

namespace sbdp {

const char* to_string(Integrator m) {
  switch (m) {
    case Integrator::euler: return "euler";
    case Integrator::heun: return "heun";
    case Integrator::rk4: return "rk4";
  }
  return "?";
}

Integrator parse_integrator(const std::string& name) {
  if (name == "euler") return Integrator::euler;
  if (name == "heun") return Integrator::heun;
  if (name == "rk4") return Integrator::rk4;
  throw Error(ErrorKind::unsupported_structure,
              "integrator '" + name + "' is not supported (explicit schemes: euler, heun, rk4)");
}

void ContinuousOcp::validate() const {
  if (!(horizon > 0) || !std::isfinite(horizon))
    throw Error(ErrorKind::invalid_parameter, "horizon must be positive");
  if (static_cast<int>(agents.size()) != graph.agent_count())
    throw Error(ErrorKind::dimension_mismatch, "agent list does not match the graph");
  for (int i = 0; i < graph.agent_count(); ++i) {
    const OcpAgent& a = agents[i];
    auto bad = [&](const std::string& field) {
      return Error(ErrorKind::dimension_mismatch, "ocp agent " + std::to_string(i) + ": " + field,
                   i, field);
    };
    if (a.nx <= 0 || a.nu < 0) throw bad("nx/nu");
    if (!a.drift) throw bad("drift");
    if (a.x0.size() != a.nx) throw bad("x0");
    if (a.xN && a.xN->size() != a.nx) throw bad("xN");
    if (a.x_lower.size() != 0 && a.x_lower.size() != a.nx) throw bad("x_lower");
    if (a.x_upper.size() != 0 && a.x_upper.size() != a.nx) throw bad("x_upper");
    if (a.u_lower.size() != 0 && a.u_lower.size() != a.nu) throw bad("u_lower");
    if (a.u_upper.size() != 0 && a.u_upper.size() != a.nu) throw bad("u_upper");
  }
}

int DiscretizedOcp::state_index(int agent, int k, int component) const {
  return k * nx[agent] + component;
}

int DiscretizedOcp::input_index(int agent, int k, int component) const {
  return (N + 1) * nx[agent] + k * nu[agent] + component;
}

StageIndex DiscretizedOcp::locate(int agent, int flat) const {
  const int states = (N + 1) * nx[agent];
  if (flat < 0 || flat >= states + N * nu[agent])
    throw Error(ErrorKind::dimension_mismatch, "flat index out of range", agent);
  StageIndex s;
  if (flat < states) {
    s.kind = StageIndex::Kind::state;
    s.stage = flat / nx[agent];
    s.component = flat % nx[agent];
  } else {
    s.kind = StageIndex::Kind::input;
    s.stage = (flat - states) / nu[agent];
    s.component = (flat - states) % nu[agent];
  }
  return s;
}

namespace {

struct Tableau {
  std::vector<std::vector<double>> a;  // strictly lower triangular
  std::vector<double> b;
};

const Tableau& tableau(Integrator m) {
  static const Tableau euler{{{}}, {1.0}};
  static const Tableau heun{{{}, {1.0}}, {0.5, 0.5}};
  static const Tableau rk4{{{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}},
                           {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6}};
  switch (m) {
    case Integrator::euler: return euler;
    case Integrator::heun: return heun;
    case Integrator::rk4: return rk4;
  }
  return euler;
}

Vec rhs(const OcpAgent& a, const Vec& x, const Vec& u, const std::vector<Vec>& nb) {
  Vec f = a.drift(x, u);
  if (a.coupling)
    for (const Vec& xj : nb) f += a.coupling(x, xj);
  return f;
}

void rhs_jacobian(const OcpAgent& a, const Vec& x, const Vec& u, const std::vector<Vec>& nb,
                  Mat& fx, Mat& fu, std::vector<Mat>& fn) {
  if (a.drift_jacobian) {
    a.drift_jacobian(x, u, fx, fu);
  } else {
    fx = fd_jacobian([&](const Vec& z) { return a.drift(z, u); }, x, a.nx);
    fu = a.nu > 0 ? fd_jacobian([&](const Vec& z) { return a.drift(x, z); }, u, a.nx)
                  : Mat(a.nx, 0);
  }
  fn.resize(nb.size());
  for (size_t s = 0; s < nb.size(); ++s) {
    const Vec& xj = nb[s];
    if (!a.coupling) {
      fn[s] = Mat::Zero(a.nx, xj.size());
      continue;
    }
    if (a.coupling_jacobian) {
      Mat cx, cj;
      a.coupling_jacobian(x, xj, cx, cj);
      fx += cx;
      fn[s] = cj;
    } else {
      fx += fd_jacobian([&](const Vec& z) { return a.coupling(z, xj); }, x, a.nx);
      fn[s] = fd_jacobian([&](const Vec& z) { return a.coupling(x, z); }, xj, a.nx);
    }
  }
}

bool analytic_derivatives(const OcpAgent& a) {
  return a.drift_jacobian && (!a.coupling || a.coupling_jacobian) &&
         (!a.stage_cost || a.stage_cost_gradient) &&
         (!a.coupling_cost || a.coupling_cost_gradient) &&
         (!a.terminal_cost || a.terminal_cost_gradient);
}

void stage_cost_grad(const OcpAgent& a, const Vec& x, const Vec& u, Vec& gx, Vec& gu) {
  if (!a.stage_cost) {
    gx = Vec::Zero(a.nx);
    gu = Vec::Zero(a.nu);
  } else if (a.stage_cost_gradient) {
    a.stage_cost_gradient(x, u, gx, gu);
  } else {
    gx = fd_gradient([&](const Vec& z) { return a.stage_cost(z, u); }, x);
    gu = a.nu > 0 ? fd_gradient([&](const Vec& z) { return a.stage_cost(x, z); }, u) : Vec(0);
  }
}

void coupling_cost_grad(const OcpAgent& a, const Vec& x, const Vec& xj, Vec& gx, Vec& gj) {
  if (!a.coupling_cost) {
    gx = Vec::Zero(a.nx);
    gj = Vec::Zero(xj.size());
  } else if (a.coupling_cost_gradient) {
    a.coupling_cost_gradient(x, xj, gx, gj);
  } else {
    gx = fd_gradient([&](const Vec& z) { return a.coupling_cost(z, xj); }, x);
    gj = fd_gradient([&](const Vec& z) { return a.coupling_cost(x, z); }, xj);
  }
}

Vec terminal_grad(const OcpAgent& a, const Vec& x) {
  if (!a.terminal_cost) return Vec::Zero(a.nx);
  if (a.terminal_cost_gradient) return a.terminal_cost_gradient(x);
  return fd_gradient(a.terminal_cost, x);
}

struct BoundRow {
  int index;    // flat decision index
  double sign;  // +1: x - ub, -1: lb - x
  double bound;
};

// Everything an agent's transcribed functions need, shared by the callables.
struct AgentTranscription {
  OcpAgent model;
  Integrator integrator;
  int N;
  double dt;
  double weight;  // dt or 1
  std::vector<int> nbr_nx;
  std::vector<BoundRow> bounds;
  bool analytic;

  int nx() const { return model.nx; }
  int nu() const { return model.nu; }
  int n() const { return (N + 1) * nx() + N * nu(); }
  int n_eq() const { return N * nx() + nx() + (model.xN ? nx() : 0); }

  Vec state(const Vec& z, int k) const { return z.segment(k * nx(), nx()); }
  Vec input(const Vec& z, int k) const { return z.segment((N + 1) * nx() + k * nu(), nu()); }
  Vec nbr_state(const Blocks& b, int s, int k) const {
    return b[s + 1].segment(k * nbr_nx[s], nbr_nx[s]);
  }
  std::vector<Vec> nbr_states(const Blocks& b, int k) const {
    std::vector<Vec> out;
    for (size_t s = 0; s < nbr_nx.size(); ++s) out.push_back(nbr_state(b, int(s), k));
    return out;
  }

  double objective(const Blocks& b, bool with_coupling) const {
    double v = 0;
    for (int k = 0; k < N; ++k) {
      Vec x = state(b[0], k);
      if (model.stage_cost) v += weight * model.stage_cost(x, input(b[0], k));
      if (with_coupling && model.coupling_cost)
        for (size_t s = 0; s < nbr_nx.size(); ++s)
          v += weight * model.coupling_cost(x, nbr_state(b, int(s), k));
    }
    if (model.terminal_cost) v += model.terminal_cost(state(b[0], N));
    return v;
  }

  // Dynamics rows with the given neighbor subset, then init and terminal rows.
  Vec equality(const Blocks& b, const std::vector<int>& subset) const {
    Vec g(n_eq());
    for (int k = 0; k < N; ++k) {
      std::vector<Vec> nb;
      for (int s : subset) nb.push_back(nbr_state(b, s, k));
      StepIncrement inc =
          step_increment(model, integrator, dt, state(b[0], k), input(b[0], k), nb, false);
      g.segment(k * nx(), nx()) = state(b[0], k + 1) - state(b[0], k) - dt * inc.f;
    }
    g.segment(N * nx(), nx()) = state(b[0], 0) - model.x0;
    if (model.xN) g.segment((N + 1) * nx(), nx()) = state(b[0], N) - *model.xN;
    return g;
  }

  std::vector<int> all_neighbors() const {
    std::vector<int> s(nbr_nx.size());
    for (size_t i = 0; i < s.size(); ++i) s[i] = int(i);
    return s;
  }

  Vec inequality(const Blocks& b) const {
    Vec h(bounds.size());
    for (size_t r = 0; r < bounds.size(); ++r) {
      const BoundRow& br = bounds[r];
      h[r] = br.sign * (b[0][br.index] - br.bound);
    }
    return h;
  }

  Vec objective_gradient(const Blocks& b, int block) const {
    if (block == 0) {
      Vec g = Vec::Zero(n());
      for (int k = 0; k < N; ++k) {
        Vec x = state(b[0], k);
        Vec gx, gu;
        stage_cost_grad(model, x, input(b[0], k), gx, gu);
        g.segment(k * nx(), nx()) += weight * gx;
        g.segment((N + 1) * nx() + k * nu(), nu()) += weight * gu;
        if (model.coupling_cost)
          for (size_t s = 0; s < nbr_nx.size(); ++s) {
            Vec cx, cj;
            coupling_cost_grad(model, x, nbr_state(b, int(s), k), cx, cj);
            g.segment(k * nx(), nx()) += weight * cx;
          }
      }
      g.segment(N * nx(), nx()) += terminal_grad(model, state(b[0], N));
      return g;
    }
    return pair_objective_gradient(b, block - 1);
  }

  Vec pair_objective_gradient(const Blocks& b, int s) const {
    Vec g = Vec::Zero(b[s + 1].size());
    if (!model.coupling_cost) return g;
    for (int k = 0; k < N; ++k) {
      Vec cx, cj;
      coupling_cost_grad(model, state(b[0], k), nbr_state(b, s, k), cx, cj);
      g.segment(k * nbr_nx[s], nbr_nx[s]) += weight * cj;
    }
    return g;
  }

  Mat equality_jacobian(const Blocks& b, int block, const std::vector<int>& subset) const {
    const int cols = block == 0 ? n() : int(b[block].size());
    Mat J = Mat::Zero(n_eq(), cols);
    for (int k = 0; k < N; ++k) {
      std::vector<Vec> nb;
      for (int s : subset) nb.push_back(nbr_state(b, s, k));
      StepIncrement inc = step_increment(model, integrator, dt, state(b[0], k), input(b[0], k), nb);
      const int r = k * nx();
      if (block == 0) {
        J.block(r, k * nx(), nx(), nx()) = -Mat::Identity(nx(), nx()) - dt * inc.fx;
        J.block(r, (k + 1) * nx(), nx(), nx()) += Mat::Identity(nx(), nx());
        J.block(r, (N + 1) * nx() + k * nu(), nx(), nu()) = -dt * inc.fu;
      } else {
        const int s = block - 1;
        auto it = std::find(subset.begin(), subset.end(), s);
        if (it == subset.end()) continue;
        J.block(r, k * nbr_nx[s], nx(), nbr_nx[s]) = -dt * inc.fn[it - subset.begin()];
      }
    }
    if (block == 0) {
      J.block(N * nx(), 0, nx(), nx()).setIdentity();
      if (model.xN) J.block((N + 1) * nx(), N * nx(), nx(), nx()).setIdentity();
    }
    return J;
  }

  Mat inequality_jacobian(const Blocks& b, int block) const {
    const int cols = block == 0 ? n() : int(b[block].size());
    Mat J = Mat::Zero(bounds.size(), cols);
    if (block == 0)
      for (size_t r = 0; r < bounds.size(); ++r) J(r, bounds[r].index) = bounds[r].sign;
    return J;
  }

  // Stage variables of a block at stage k, as flat indices into that block.
  std::vector<int> stage_vars(int block, int k) const {
    std::vector<int> v;
    if (block == 0) {
      for (int c = 0; c < nx(); ++c) v.push_back(k * nx() + c);
      for (int c = 0; c < nu(); ++c) v.push_back((N + 1) * nx() + k * nu() + c);
    } else {
      const int s = block - 1;
      for (int c = 0; c < nbr_nx[s]; ++c) v.push_back(k * nbr_nx[s] + c);
    }
    return v;
  }

  // Gradient of the nonlinear part of the stage-k Lagrangian with respect to
  // one block's stage variables.
  Vec stage_gradient(const Blocks& b, const Vec& lambda, int k, int block) const {
    Vec x = state(b[0], k), u = input(b[0], k);
    std::vector<Vec> nb = nbr_states(b, k);
    StepIncrement inc = step_increment(model, integrator, dt, x, u, nb);
    Vec lk = lambda.segment(k * nx(), nx());
    if (block == 0) {
      Vec gx, gu;
      stage_cost_grad(model, x, u, gx, gu);
      gx *= weight;
      gu *= weight;
      if (model.coupling_cost)
        for (const Vec& xj : nb) {
          Vec cx, cj;
          coupling_cost_grad(model, x, xj, cx, cj);
          gx += weight * cx;
        }
      gx -= dt * inc.fx.transpose() * lk;
      gu -= dt * inc.fu.transpose() * lk;
      Vec g(nx() + nu());
      g << gx, gu;
      return g;
    }
    const int s = block - 1;
    Vec g = -dt * inc.fn[s].transpose() * lk;
    if (model.coupling_cost) {
      Vec cx, cj;
      coupling_cost_grad(model, x, nb[s], cx, cj);
      g += weight * cj;
    }
    return g;
  }

  double outer_step(double v) const {
    return analytic ? fd_step(v) : 1e-4 * std::max(1.0, std::abs(v));
  }

  Mat lagrangian_hessian(const Blocks& b, const Vec& lambda, int ra, int cb) const {
    const int rows = ra == 0 ? n() : int(b[ra].size());
    const int cols = cb == 0 ? n() : int(b[cb].size());
    Mat H = Mat::Zero(rows, cols);
    for (int k = 0; k < N; ++k) {
      std::vector<int> rv = stage_vars(ra, k), cv = stage_vars(cb, k);
      for (size_t c = 0; c < cv.size(); ++c) {
        Blocks bp = b, bm = b;
        const double h = outer_step(b[cb][cv[c]]);
        bp[cb][cv[c]] += h;
        bm[cb][cv[c]] -= h;
        Vec d = (stage_gradient(bp, lambda, k, ra) - stage_gradient(bm, lambda, k, ra)) / (2 * h);
        for (size_t r = 0; r < rv.size(); ++r) H(rv[r], cv[c]) += d[r];
      }
    }
    if (ra == 0 && cb == 0 && model.terminal_cost) {
      Vec xN = state(b[0], N);
      for (int c = 0; c < nx(); ++c) {
        Vec xp = xN, xm = xN;
        const double h = outer_step(xN[c]);
        xp[c] += h;
        xm[c] -= h;
        Vec d = (terminal_grad(model, xp) - terminal_grad(model, xm)) / (2 * h);
        H.block(N * nx(), N * nx() + c, nx(), 1) += d;
      }
    }
    return H;
  }
};

std::vector<BoundRow> bound_rows(const OcpAgent& a, int N) {
  std::vector<BoundRow> rows;
  auto add = [&](int index, const Vec& lo, const Vec& hi, int c) {
    if (hi.size() && std::isfinite(hi[c])) rows.push_back({index, 1.0, hi[c]});
    if (lo.size() && std::isfinite(lo[c])) rows.push_back({index, -1.0, lo[c]});
  };
  for (int k = 0; k <= N; ++k)
    for (int c = 0; c < a.nx; ++c) add(k * a.nx + c, a.x_lower, a.x_upper, c);
  for (int k = 0; k < N; ++k)
    for (int c = 0; c < a.nu; ++c) add((N + 1) * a.nx + k * a.nu + c, a.u_lower, a.u_upper, c);
  return rows;
}

AgentFunctions agent_functions(std::shared_ptr<const AgentTranscription> t) {
  AgentFunctions f;
  f.n = t->n();
  f.n_eq = t->n_eq();
  f.n_ineq = static_cast<int>(t->bounds.size());
  f.objective = [t](const Blocks& b) { return t->objective(b, true); };
  f.equality = [t](const Blocks& b) { return t->equality(b, t->all_neighbors()); };
  f.inequality = [t](const Blocks& b) { return t->inequality(b); };
  f.objective_gradient = [t](const Blocks& b, int block) {
    return t->objective_gradient(b, block);
  };
  f.equality_jacobian = [t](const Blocks& b, int block) {
    return t->equality_jacobian(b, block, t->all_neighbors());
  };
  f.inequality_jacobian = [t](const Blocks& b, int block) {
    return t->inequality_jacobian(b, block);
  };
  f.lagrangian_hessian = [t](const Blocks& b, const Vec& lambda, const Vec&, int ra, int cb) {
    return t->lagrangian_hessian(b, lambda, ra, cb);
  };
  return f;
}

NeighborAffineFunctions affine_functions(std::shared_ptr<const AgentTranscription> t) {
  NeighborAffineFunctions a;
  auto own = [](const Vec& xi) { return Blocks{xi}; };
  a.objective = [t, own](const Vec& xi) { return t->objective(own(xi), false); };
  a.equality = [t, own](const Vec& xi) { return t->equality(own(xi), {}); };
  a.inequality = [t, own](const Vec& xi) { return t->inequality(own(xi)); };
  const int m = static_cast<int>(t->nbr_nx.size());
  for (int s = 0; s < m; ++s) {
    // Pair callables see (x_i, x_j); place x_j in slot s of otherwise-unused blocks.
    auto blocks = [t, s](const Vec& xi, const Vec& xj) {
      Blocks b(t->nbr_nx.size() + 1);
      b[0] = xi;
      for (size_t r = 0; r < t->nbr_nx.size(); ++r)
        b[r + 1] = Vec::Zero((t->N + 1) * t->nbr_nx[r]);
      b[s + 1] = xj;
      return b;
    };
    PairTerms p;
    if (t->model.coupling_cost) {
      p.objective = [t, s, blocks](const Vec& xi, const Vec& xj) {
        Blocks b = blocks(xi, xj);
        double v = 0;
        for (int k = 0; k < t->N; ++k)
          v += t->weight * t->model.coupling_cost(t->state(xi, k), t->nbr_state(b, s, k));
        return v;
      };
      p.objective_gradient_j = [t, s, blocks](const Vec& xi, const Vec& xj) {
        return t->pair_objective_gradient(blocks(xi, xj), s);
      };
    }
    if (t->model.coupling) {
      p.equality = [t, s, blocks](const Vec& xi, const Vec& xj) {
        Blocks b = blocks(xi, xj);
        Vec g = Vec::Zero(t->n_eq());
        for (int k = 0; k < t->N; ++k) {
          Vec x = t->state(xi, k), u = t->input(xi, k);
          Vec with = step_increment(t->model, t->integrator, t->dt, x, u,
                                    {t->nbr_state(b, s, k)}, false).f;
          Vec without = step_increment(t->model, t->integrator, t->dt, x, u, {}, false).f;
          g.segment(k * t->nx(), t->nx()) = -t->dt * (with - without);
        }
        return g;
      };
      p.equality_jacobian_j = [t, s, blocks](const Vec& xi, const Vec& xj) {
        return t->equality_jacobian(blocks(xi, xj), s + 1, {s});
      };
    }
    a.pairs.push_back(std::move(p));
  }
  return a;
}

// Compares the split against the full functions at random points.
std::string affine_mismatch(const PartitionedNlp& nlp,
                            const std::vector<NeighborAffineFunctions>& form) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < nlp.agent_count(); ++i) {
    const auto& nb = nlp.graph.neighbors(i);
    for (int trial = 0; trial < 3; ++trial) {
      Blocks b;
      b.push_back(Vec::NullaryExpr(nlp.agents[i].n, [&](Eigen::Index) { return unit(rng); }));
      for (int j : nb)
        b.push_back(Vec::NullaryExpr(nlp.agents[j].n, [&](Eigen::Index) { return unit(rng); }));
      double f = form[i].objective(b[0]);
      Vec g = form[i].equality(b[0]);
      for (size_t s = 0; s < nb.size(); ++s) {
        const PairTerms& p = form[i].pairs[s];
        if (p.objective) f += p.objective(b[0], b[s + 1]);
        if (p.equality) g += p.equality(b[0], b[s + 1]);
      }
      const double f_full = nlp.agents[i].objective(b);
      const Vec g_full = nlp.agents[i].equality(b);
      const double g_err = (g - g_full).lpNorm<Eigen::Infinity>();
      if (std::abs(f - f_full) > 1e-9 * (1 + std::abs(f_full)) ||
          g_err > 1e-9 * (1 + g_full.lpNorm<Eigen::Infinity>())) {
        std::ostringstream os;
        os << "agent " << i << ": discretized dynamics are not additive in the neighbor states"
           << " (mismatch " << std::max(std::abs(f - f_full), g_err) << ")";
        return os.str();
      }
    }
  }
  return {};
}

}  // namespace

StepIncrement step_increment(const OcpAgent& a, Integrator m, double dt, const Vec& x,
                             const Vec& u, const std::vector<Vec>& neighbors, bool jacobians) {
  const Tableau& tb = tableau(m);
  const int stages = static_cast<int>(tb.b.size());
  const int nx = a.nx;
  const size_t nn = neighbors.size();
  std::vector<Vec> k(stages);
  std::vector<Mat> kx(stages), ku(stages);
  std::vector<std::vector<Mat>> kn(stages);

  StepIncrement out;
  out.f = Vec::Zero(nx);
  if (jacobians) {
    out.fx = Mat::Zero(nx, nx);
    out.fu = Mat::Zero(nx, a.nu);
    out.fn.resize(nn);
    for (size_t s = 0; s < nn; ++s) out.fn[s] = Mat::Zero(nx, neighbors[s].size());
  }
  for (int st = 0; st < stages; ++st) {
    Vec y = x;
    for (int l = 0; l < st; ++l)
      if (tb.a[st][l] != 0.0) y += dt * tb.a[st][l] * k[l];
    k[st] = rhs(a, y, u, neighbors);
    out.f += tb.b[st] * k[st];
    if (!jacobians) continue;

    // dy/dz = [I, 0, 0] + dt sum_l a_l dk_l/dz, then dk/dz = F_x dy/dz + F_z.
    Mat yx = Mat::Identity(nx, nx), yu = Mat::Zero(nx, a.nu);
    std::vector<Mat> yn(nn);
    for (size_t s = 0; s < nn; ++s) yn[s] = Mat::Zero(nx, neighbors[s].size());
    for (int l = 0; l < st; ++l) {
      const double c = tb.a[st][l];
      if (c == 0.0) continue;
      yx += dt * c * kx[l];
      yu += dt * c * ku[l];
      for (size_t s = 0; s < nn; ++s) yn[s] += dt * c * kn[l][s];
    }
    Mat Fx, Fu;
    std::vector<Mat> Fn;
    rhs_jacobian(a, y, u, neighbors, Fx, Fu, Fn);
    kx[st] = Fx * yx;
    ku[st] = Fx * yu + Fu;
    kn[st].resize(nn);
    for (size_t s = 0; s < nn; ++s) kn[st][s] = Fx * yn[s] + Fn[s];

    out.fx += tb.b[st] * kx[st];
    out.fu += tb.b[st] * ku[st];
    for (size_t s = 0; s < nn; ++s) out.fn[s] += tb.b[st] * kn[st][s];
  }
  return out;
}

DiscretizedOcp discretize(const ContinuousOcp& ocp, int N, Integrator integrator) {
  if (N < 1) throw Error(ErrorKind::invalid_parameter, "N must be at least 1");
  ocp.validate();
  const int M = ocp.graph.agent_count();

  DiscretizedOcp d;
  d.N = N;
  d.horizon = ocp.horizon;
  d.dt = ocp.horizon / N;
  d.integrator = integrator;
  d.nlp.graph = ocp.graph;
  std::vector<std::shared_ptr<const AgentTranscription>> ts;
  for (int i = 0; i < M; ++i) {
    auto t = std::make_shared<AgentTranscription>();
    t->model = ocp.agents[i];
    t->integrator = integrator;
    t->N = N;
    t->dt = d.dt;
    t->weight = ocp.integrate_stage_cost ? d.dt : 1.0;
    for (int j : ocp.graph.neighbors(i)) t->nbr_nx.push_back(ocp.agents[j].nx);
    t->bounds = bound_rows(ocp.agents[i], N);
    t->analytic = analytic_derivatives(ocp.agents[i]);
    d.nx.push_back(ocp.agents[i].nx);
    d.nu.push_back(ocp.agents[i].nu);
    d.nlp.agents.push_back(agent_functions(t));
    ts.push_back(t);
  }

  if (!ocp.neighbor_affine) {
    d.affine_note = "neighbor-affine split not declared";
    return d;
  }
  std::vector<NeighborAffineFunctions> form;
  for (int i = 0; i < M; ++i) form.push_back(affine_functions(ts[i]));
  d.affine_note = affine_mismatch(d.nlp, form);
  if (d.affine_note.empty()) d.nlp.affine_form = std::move(form);
  return d;
}

PrimalDualPoint initial_guess(const DiscretizedOcp& d, const ContinuousOcp& ocp) {
  PrimalDualPoint p = PrimalDualPoint::zeros(d.nlp);
  for (int i = 0; i < d.nlp.agent_count(); ++i) {
    const OcpAgent& a = ocp.agents[i];
    for (int k = 0; k <= d.N; ++k) {
      const double s = static_cast<double>(k) / d.N;
      Vec x = a.xN ? Vec((1 - s) * a.x0 + s * *a.xN) : a.x0;
      p.agents[i].x.segment(d.state_index(i, k, 0), a.nx) = x;
    }
  }
  return p;
}

std::optional<double> closed_form_tmax_integrator(double q, double r, double w) {
  if (!(q > 0) || !(r > 0))
    throw Error(ErrorKind::invalid_parameter, "q and r must be positive");
  const double denom = 2 * std::abs(w) - q;
  if (denom <= 0) return std::nullopt;
  return std::sqrt(4 * r / denom);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0) || !(hi >= lo) || count < 1)
    throw Error(ErrorKind::invalid_parameter, "log grid needs 0 < lo <= hi and count >= 1");
  std::vector<double> g(count);
  for (int k = 0; k < count; ++k) {
    const double s = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    g[k] = std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo)));
  }
  return g;
}

SweepResult horizon_sweep(const ContinuousOcp& ocp, int N, std::vector<double> grid,
                          Integrator integrator, CentralSolver solver, int parallelism) {
  std::sort(grid.begin(), grid.end());
  if (!solver) {
    solver = [](const PartitionedNlp& nlp, const PrimalDualPoint& warm) {
      SolverSettings s;
      s.kkt_tolerance = 1e-10;
      s.max_sqp_iterations = 200;
      return solve_central(nlp, warm, s, 1e-8);
    };
  }
  SweepResult out;
  std::optional<PrimalDualPoint> previous;
  bool all_converging = true;
  for (double T : grid) {
    SweepRow row;
    row.T = T;
    try {
      ContinuousOcp at = ocp;
      at.horizon = T;
      DiscretizedOcp d = discretize(at, N, integrator);
      PrimalDualPoint warm = previous ? *previous : initial_guess(d, at);
      PrimalDualPoint p = solver(d.nlp, warm);
      previous = p;
      JacobianAssembly ja = jacobian(d.nlp, p, true, 1e-8, parallelism);
      row.norm = spectral_norm(ja.J);
      row.spectral_radius = spectral_radius(ja.J);
      row.converges = row.spectral_radius < 1;
      row.order = classify_order(row.spectral_radius);
      row.complementarity_ok = ja.strict_complementarity_ok;
      if (!row.complementarity_ok) row.note = "strict complementarity violated";
      row.available = true;
    } catch (const std::exception& e) {
      row.available = false;
      row.note = e.what();
    }
    if (row.available) {
      if (!row.converges) all_converging = false;
      if (all_converging) out.empirical_tmax = T;
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace sbdp
