#include "sbdp/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "parallel.hpp"
#include "sbdp/derivatives.hpp"
#include "sbdp/model.hpp"

namespace sbdp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void rethrow_first(const std::vector<std::string>& errors, ErrorKind kind) {
  int i = detail::first_error(errors);
  if (i >= 0) throw Error(kind, errors[i], i);
}

// Offsets of x_i, lambda_i, mu_i inside the stacked vector.
struct Layout {
  std::vector<int> x, l, m;
  explicit Layout(const PartitionedNlp& nlp) {
    int off = 0;
    for (const auto& a : nlp.agents) {
      x.push_back(off);
      l.push_back(off + a.n);
      m.push_back(off + a.n + a.n_eq);
      off += a.n + a.n_eq + a.n_ineq;
    }
  }
};

Mat M_block(const PartitionedNlp& nlp, const PrimalDualPoint& p, int i) {
  const auto& a = nlp.agents[i];
  const auto& ap = p.agents[i];
  Blocks b = gather_blocks(nlp, i, p);
  const int n = a.n, ng = a.n_eq, nh = a.n_ineq;
  Mat Mi = Mat::Zero(n + ng + nh, n + ng + nh);
  Mi.topLeftCorner(n, n) = lagrangian_hessian(a, b, ap.lambda, ap.mu, 0, 0);
  if (ng) {
    Mat G = equality_jacobian(a, b, 0);
    Mi.block(0, n, n, ng) = G.transpose();
    Mi.block(n, 0, ng, n) = G;
  }
  if (nh) {
    Mat A = inequality_jacobian(a, b, 0);
    Vec h = eval_inequality(a, b);
    Mi.block(0, n + ng, n, nh) = A.transpose();
    Mi.block(n + ng, 0, nh, n) = ap.mu.asDiagonal() * A;
    Mi.block(n + ng, n + ng, nh, nh) = h.asDiagonal();
  }
  return Mi;
}

// Rows of N belonging to agent i (all columns).
Mat N_rows(const PartitionedNlp& nlp, const PrimalDualPoint& p, const Layout& lay, int i) {
  const auto& g = nlp.graph;
  const auto& a = nlp.agents[i];
  const auto& ap = p.agents[i];
  const int n = a.n, ng = a.n_eq;
  Mat rows = Mat::Zero(nlp.block_size(i), nlp.stacked_size());

  // Agent i's own functions, differentiated in the frozen neighbor x_j.
  Blocks bi = gather_blocks(nlp, i, p);
  const auto& nb = g.neighbors(i);
  for (size_t s = 0; s < nb.size(); ++s) {
    int j = nb[s];
    int blk = static_cast<int>(s) + 1;
    const int nj = nlp.agents[j].n;
    rows.block(0, lay.x[j], n, nj) +=
        lagrangian_hessian(a, bi, ap.lambda, ap.mu, 0, blk);
    if (ng) rows.block(n, lay.x[j], ng, nj) = equality_jacobian(a, bi, blk);
    if (a.n_ineq)
      rows.block(n + ng, lay.x[j], a.n_ineq, nj) =
          ap.mu.asDiagonal() * inequality_jacobian(a, bi, blk);
  }

  // Stationarity rows: derivatives of the received sensitivities
  // sum_{k: i in N_k} grad_{x_i} L_k with respect to every argument of L_k.
  for (int k : g.dependents(i)) {
    const auto& ak = nlp.agents[k];
    const auto& pk = p.agents[k];
    Blocks bk = gather_blocks(nlp, k, p);
    const int si = g.slot(k, i) + 1;
    rows.block(0, lay.x[k], n, ak.n) += lagrangian_hessian(ak, bk, pk.lambda, pk.mu, si, 0);
    const auto& nbk = g.neighbors(k);
    for (size_t s = 0; s < nbk.size(); ++s) {
      int j = nbk[s];
      rows.block(0, lay.x[j], n, nlp.agents[j].n) +=
          lagrangian_hessian(ak, bk, pk.lambda, pk.mu, si, static_cast<int>(s) + 1);
    }
    if (ak.n_eq)
      rows.block(0, lay.l[k], n, ak.n_eq) = equality_jacobian(ak, bk, si).transpose();
    if (ak.n_ineq)
      rows.block(0, lay.m[k], n, ak.n_ineq) = inequality_jacobian(ak, bk, si).transpose();
  }
  return rows;
}

}  // namespace

ActiveSetPartition active_sets(const PartitionedNlp& nlp, const PrimalDualPoint& point,
                               double eps_act) {
  ActiveSetPartition out;
  for (int i = 0; i < nlp.agent_count(); ++i) {
    out.active.emplace_back();
    out.inactive.emplace_back();
    Vec h = eval_inequality(nlp.agents[i], gather_blocks(nlp, i, point));
    for (int k = 0; k < h.size(); ++k) {
      if (std::abs(h(k)) <= eps_act)
        out.active.back().push_back(k);
      else if (h(k) < -eps_act)
        out.inactive.back().push_back(k);
      else
        out.active.back().push_back(k);  // violated: treated as active (not KKT)
    }
  }
  return out;
}

Mat build_M(const PartitionedNlp& nlp, const PrimalDualPoint& point, int parallelism) {
  point.check_dimensions(nlp);
  Layout lay(nlp);
  const int M = nlp.agent_count();
  std::vector<Mat> blocks(M);
  auto errors = detail::parallel_for(M, parallelism, [&](int i) {
    blocks[i] = M_block(nlp, point, i);
  });
  rethrow_first(errors, ErrorKind::evaluation_error);
  Mat out = Mat::Zero(nlp.stacked_size(), nlp.stacked_size());
  for (int i = 0; i < M; ++i) out.block(lay.x[i], lay.x[i], blocks[i].rows(), blocks[i].cols()) = blocks[i];
  return out;
}

Mat build_N(const PartitionedNlp& nlp, const PrimalDualPoint& point, int parallelism) {
  point.check_dimensions(nlp);
  Layout lay(nlp);
  const int M = nlp.agent_count();
  std::vector<Mat> rows(M);
  auto errors = detail::parallel_for(M, parallelism, [&](int i) {
    rows[i] = N_rows(nlp, point, lay, i);
  });
  rethrow_first(errors, ErrorKind::evaluation_error);
  Mat out(nlp.stacked_size(), nlp.stacked_size());
  for (int i = 0; i < M; ++i) out.middleRows(lay.x[i], rows[i].rows()) = rows[i];
  return out;
}

JacobianAssembly jacobian(const PartitionedNlp& nlp, const PrimalDualPoint& point,
                          bool prune_inactive, double eps_act, int parallelism) {
  point.check_dimensions(nlp);
  Layout lay(nlp);
  const int M = nlp.agent_count();
  const int P = nlp.stacked_size();
  JacobianAssembly out;
  out.M = Mat::Zero(P, P);
  out.N.resize(P, P);
  out.J_full.resize(P, P);

  std::vector<Mat> Mb(M), Nr(M), Jr(M);
  std::vector<char> singular(M, 0);
  auto errors = detail::parallel_for(M, parallelism, [&](int i) {
    Mb[i] = M_block(nlp, point, i);
    Nr[i] = N_rows(nlp, point, lay, i);
    Eigen::PartialPivLU<Mat> lu(Mb[i]);
    double rc = lu.rcond();
    if (!(rc > 1e-14)) {
      singular[i] = 1;
      return;
    }
    Jr[i] = -lu.solve(Nr[i]);
  });
  rethrow_first(errors, ErrorKind::evaluation_error);
  for (int i = 0; i < M; ++i)
    if (singular[i])
      throw Error(ErrorKind::singular_matrix,
                  "M block is singular; the regularity assumption (LICQ/SOSC) fails at agent " +
                      std::to_string(i),
                  i);

  for (int i = 0; i < M; ++i) {
    const int b = nlp.block_size(i);
    out.M.block(lay.x[i], lay.x[i], b, b) = Mb[i];
    out.N.middleRows(lay.x[i], b) = Nr[i];
    out.J_full.middleRows(lay.x[i], b) = Jr[i];
  }

  ActiveSetPartition sets = active_sets(nlp, point, eps_act);
  std::vector<char> drop(P, 0);
  for (int i = 0; i < M; ++i) {
    for (int k : sets.active[i])
      if (point.agents[i].mu(k) < eps_act) out.strict_complementarity_ok = false;
    if (prune_inactive)
      for (int k : sets.inactive[i])
        if (std::abs(point.agents[i].mu(k)) <= eps_act) drop[lay.m[i] + k] = 1;
  }
  for (int r = 0; r < P; ++r)
    if (!drop[r]) out.kept.push_back(r);
  out.inactive_rows_pruned = prune_inactive && static_cast<int>(out.kept.size()) < P;
  out.J = out.J_full(out.kept, out.kept);
  return out;
}

double spectral_norm(const Mat& A, std::uint64_t seed) {
  if (A.size() == 0) return 0.0;
  if (!A.allFinite()) throw Error(ErrorKind::evaluation_error, "spectral_norm: non-finite entries");
  if (A.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  // Work with the smaller Gram matrix; both share the nonzero spectrum.
  Mat G = A.rows() < A.cols() ? Mat(A * A.transpose()) : Mat(A.transpose() * A);
  const int n = static_cast<int>(G.rows());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;

  double best = 0.0;
  for (int restart = 0; restart < 8; ++restart) {
    Vec v(n);
    for (int k = 0; k < n; ++k) v(k) = normal(rng);
    v.normalize();
    double lam = 0.0;
    bool converged = false;
    for (int it = 0; it < 20000; ++it) {
      Vec w = G * v;
      double nw = w.norm();
      if (nw == 0.0) break;  // start vector in the null space: restart
      double next = v.dot(w);
      v = w / nw;
      if (std::abs(next - lam) <= 1e-10 * std::abs(next)) {
        lam = next;
        converged = true;
        break;
      }
      lam = next;
    }
    best = std::max(best, lam);
    if (converged) break;
  }
  return std::sqrt(std::max(best, 0.0));
}

double spectral_radius(const Mat& A) {
  if (A.size() == 0) return 0.0;
  if (A.rows() != A.cols()) throw Error(ErrorKind::dimension_mismatch, "spectral_radius: not square");
  if (!A.allFinite()) throw Error(ErrorKind::evaluation_error, "spectral_radius: non-finite entries");
  std::vector<int> keep;
  for (int c = 0; c < A.cols(); ++c)
    if (A.col(c).cwiseAbs().maxCoeff() > 0.0) keep.push_back(c);
  if (keep.empty()) return 0.0;
  // With the zero columns permuted last, A is block lower triangular with a
  // zero diagonal block, so its spectrum is that of A(keep, keep) plus zeros.
  Mat S = A(keep, keep);
  Eigen::EigenSolver<Mat> es(S, false);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::evaluation_error, "spectral_radius: eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

const char* to_string(ConvergenceOrder o) {
  switch (o) {
    case ConvergenceOrder::quadratic: return "quadratic";
    case ConvergenceOrder::linear: return "linear";
    case ConvergenceOrder::none: return "none";
  }
  return "?";
}

ConvergenceOrder classify_order(double rho, double quadratic_threshold) {
  if (rho <= quadratic_threshold) return ConvergenceOrder::quadratic;
  if (rho >= 1.0) return ConvergenceOrder::none;
  return ConvergenceOrder::linear;
}

double convergence_radius(double rho, double lipschitz) {
  if (rho >= 1.0) return 0.0;
  if (lipschitz <= 0.0) return inf;
  return 2.0 * (1.0 - rho) / lipschitz;
}

ConvergenceEstimate certify(const PartitionedNlp& nlp, const PrimalDualPoint& p,
                            const CertifyOptions& opt) {
  p.check_dimensions(nlp);
  ConvergenceEstimate est;
  est.kkt_residual = central_kkt_error(nlp, p);
  if (!(est.kkt_residual <= opt.kkt_tolerance))
    throw Error(ErrorKind::invalid_parameter,
                "certify: point is not a KKT point (residual " +
                    std::to_string(est.kkt_residual) + ")");

  ActiveSetPartition sets = active_sets(nlp, p, opt.eps_act);
  est.complementarity_margin = inf;
  for (int i = 0; i < nlp.agent_count(); ++i)
    for (int k : sets.active[i]) {
      double m = p.agents[i].mu(k);
      est.complementarity_margin = std::min(est.complementarity_margin, m);
      if (m < opt.eps_act)
        throw Error(ErrorKind::strict_complementarity,
                    "strict complementarity fails for inequality " + std::to_string(k) +
                        " (mu = " + std::to_string(m) +
                        "); the certificate requires mu_k > 0 on every active constraint",
                    i);
    }

  JacobianAssembly ja = jacobian(nlp, p, true, opt.eps_act, opt.parallelism);
  est.jacobian_norm = spectral_norm(ja.J, opt.seed);
  est.unpruned_norm = spectral_norm(ja.J_full, opt.seed);
  est.spectral_radius = spectral_radius(ja.J);
  est.rate = est.spectral_radius;
  est.order = classify_order(est.spectral_radius, opt.quadratic_threshold);

  if (opt.estimate_lipschitz) {
    const Vec center = p.stacked();
    const int d = static_cast<int>(ja.kept.size());
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto sample_point = [&](double R) {
      Vec dir(d);
      for (int k = 0; k < d; ++k) dir(k) = normal(rng);
      dir.normalize();
      Vec v = center;
      double rad = R * std::pow(unit(rng), 1.0 / d);
      for (int k = 0; k < d; ++k) v(ja.kept[k]) += rad * dir(k);
      return v;
    };
    auto restricted_J = [&](const Vec& v) {
      Mat Jf = jacobian(nlp, PrimalDualPoint::from_stacked(nlp, v), false, opt.eps_act,
                        opt.parallelism)
                   .J_full;
      return Mat(Jf(ja.kept, ja.kept));
    };
    auto sample_L = [&](double R) {
      double L = 0.0;
      for (int s = 0; s < opt.sample_pairs; ++s) {
        Vec a = sample_point(R), b = sample_point(R);
        double dist = (a - b).norm();
        if (dist == 0.0) continue;
        try {
          L = std::max(L, spectral_norm(restricted_J(a) - restricted_J(b), opt.seed) / dist);
        } catch (const Error&) {
          return inf;  // singular M or failed evaluation inside the ball
        }
      }
      return L;
    };

    double R = opt.initial_ball;
    double prev = sample_L(R);
    double L = prev;
    for (int k = 0; k < opt.max_halvings; ++k) {
      R *= 0.5;
      L = sample_L(R);
      if (std::isfinite(L) && std::isfinite(prev) &&
          std::abs(L - prev) <= 0.1 * std::max(L, prev)) {
        est.lipschitz_stable = true;
        break;
      }
      prev = L;
    }
    est.lipschitz_estimate = L;
    est.lipschitz_ball = R;
    est.radius = convergence_radius(est.spectral_radius, L);
  } else {
    est.lipschitz_estimate = std::numeric_limits<double>::quiet_NaN();
    est.radius = std::numeric_limits<double>::quiet_NaN();
  }
  return est;
}

std::vector<double> observed_rates(const std::vector<double>& errors) {
  std::vector<double> rates;
  for (size_t q = 0; q + 1 < errors.size(); ++q) {
    if (errors[q] == 0.0) break;
    rates.push_back(errors[q + 1] / errors[q]);
  }
  return rates;
}

std::vector<double> observed_rates(const IterationTrace& trace, const PrimalDualPoint& ref) {
  std::vector<double> errors;
  Vec xs = ref.primal();
  for (const auto& r : trace.records) errors.push_back((r.point.primal() - xs).norm());
  return observed_rates(errors);
}

double tail_rate(const IterationTrace& trace, const PrimalDualPoint& ref, int window,
                 double floor) {
  std::vector<double> errors;
  Vec xs = ref.primal();
  for (const auto& r : trace.records) {
    double e = (r.point.primal() - xs).norm();
    if (e <= floor) break;
    errors.push_back(e);
  }
  std::vector<double> rates = observed_rates(errors);
  if (rates.empty()) return std::numeric_limits<double>::quiet_NaN();
  int w = std::min<int>(window, static_cast<int>(rates.size()));
  double logsum = 0.0;
  for (int k = static_cast<int>(rates.size()) - w; k < static_cast<int>(rates.size()); ++k)
    logsum += std::log(rates[k]);
  return std::exp(logsum / w);
}

SolverSettings oracle_solver_settings() {
  SolverSettings s;
  s.kkt_tolerance = 1e-11;
  s.max_sqp_iterations = 200;
  return s;
}

Vec phi_finite_difference(const PartitionedNlp& nlp, const PrimalDualPoint& point,
                          const Vec& direction, double step, const SolverSettings& solver) {
  Vec p = point.stacked();
  if (direction.size() != p.size())
    throw Error(ErrorKind::dimension_mismatch, "direction has wrong length");
  Vec plus = phi_map(nlp, PrimalDualPoint::from_stacked(nlp, p + step * direction), solver)
                 .stacked();
  Vec minus = phi_map(nlp, PrimalDualPoint::from_stacked(nlp, p - step * direction), solver)
                  .stacked();
  return (plus - minus) / (2.0 * step);
}

}  // namespace sbdp
