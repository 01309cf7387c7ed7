#include "sbdp/sqp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "sbdp/qp.hpp"

namespace sbdp {

void SolverSettings::validate() const {
  auto bad = [](const char* field, const char* why) {
    throw Error(ErrorKind::invalid_parameter, std::string(field) + " " + why, -1, field);
  };
  if (!(kkt_tolerance > 0)) bad("kkt_tolerance", "must be positive");
  if (max_sqp_iterations < 1) bad("max_sqp_iterations", "must be at least 1");
  if (!(penalty_growth >= 1)) bad("penalty_growth", "must be at least 1");
  if (!(active_tolerance > 0)) bad("active_tolerance", "must be positive");
  if (!(armijo > 0 && armijo < 0.5)) bad("armijo", "must lie in (0, 0.5)");
  if (!(backtrack > 0 && backtrack < 1)) bad("backtrack", "must lie in (0, 1)");
  if (max_restorations < 0) bad("max_restorations", "must be nonnegative");
}

const char* to_string(SqpStatus s) {
  return s == SqpStatus::converged ? "converged" : "max_iterations";
}

namespace {

struct Eval {
  double f = 0;
  Vec grad, g, h;
  Mat Ag, Ah;
};

Eval evaluate(const NlpEvaluator& nlp, const Vec& x) {
  Eval e;
  e.f = nlp.objective(x);
  e.grad = nlp.gradient(x);
  e.g = nlp.equality(x);
  e.h = nlp.inequality(x);
  e.Ag = nlp.equality_jacobian(x);
  e.Ah = nlp.inequality_jacobian(x);
  return e;
}

double residual(const Eval& e, const Vec& lambda, const Vec& mu) {
  Vec stat = e.grad;
  if (e.g.size()) stat += e.Ag.transpose() * lambda;
  if (e.h.size()) stat += e.Ah.transpose() * mu;
  double r = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
  if (e.g.size()) r = std::max(r, e.g.cwiseAbs().maxCoeff());
  if (e.h.size()) {
    r = std::max(r, e.h.maxCoeff());
    r = std::max(r, mu.cwiseProduct(e.h).cwiseAbs().maxCoeff());
    r = std::max(r, (-mu).maxCoeff());
  }
  return r;
}

double violation(const Vec& g, const Vec& h) {
  return g.cwiseAbs().sum() + h.cwiseMax(0.0).sum();
}

// Null-space basis of A (rows = constraints) via column-pivoted QR of A'.
Mat null_space(const Mat& A, int n) {
  if (A.rows() == 0) return Mat::Identity(n, n);
  Eigen::ColPivHouseholderQR<Mat> qr(A.transpose());
  qr.setThreshold(1e-12);
  int rank = static_cast<int>(qr.rank());
  Mat Q = qr.householderQ() * Mat::Identity(n, n);
  return Q.rightCols(n - rank);
}

// Smallest tau in {0, 1e-8 * 2^k} making Z'(H + tau I)Z positive definite.
double inertia_shift(const Mat& H, const Mat& Z) {
  if (Z.cols() == 0) return 0.0;
  Mat Hr = Z.transpose() * H * Z;
  Hr = 0.5 * (Hr + Hr.transpose());
  Eigen::LLT<Mat> llt(Hr);
  if (llt.info() == Eigen::Success) return 0.0;
  const Mat I = Mat::Identity(Hr.rows(), Hr.cols());
  double tau = 1e-8;
  for (int k = 0; k < 200; ++k, tau *= 2.0) {
    llt.compute(Hr + tau * I);
    if (llt.info() == Eigen::Success) return tau;
  }
  throw Error(ErrorKind::singular_matrix, "inertia correction failed");
}

// Least-norm Gauss-Newton step toward the linearized feasible set.
Vec restoration_step(const Eval& e) {
  std::vector<int> rows;
  for (int k = 0; k < e.h.size(); ++k)
    if (e.h(k) > 0) rows.push_back(k);
  const int n = static_cast<int>(e.grad.size());
  Mat A(e.g.size() + rows.size(), n);
  Vec b(A.rows());
  if (e.g.size()) {
    A.topRows(e.g.size()) = e.Ag;
    b.head(e.g.size()) = -e.g;
  }
  for (size_t k = 0; k < rows.size(); ++k) {
    A.row(e.g.size() + k) = e.Ah.row(rows[k]);
    b(e.g.size() + k) = -e.h(rows[k]);
  }
  if (A.rows() == 0) return Vec::Zero(n);
  return Eigen::CompleteOrthogonalDecomposition<Mat>(A).solve(b);
}

}  // namespace

double kkt_residual(const NlpEvaluator& nlp, const Vec& x, const Vec& lambda, const Vec& mu) {
  return residual(evaluate(nlp, x), lambda, mu);
}

SqpResult solve_sqp(const NlpEvaluator& nlp, const Vec& x0, const Vec& lambda0, const Vec& mu0,
                    const SolverSettings& settings, const std::vector<int>& warm_active) {
  settings.validate();
  const int n = nlp.variables();
  const int ng = nlp.equalities();
  const int nh = nlp.inequalities();
  if (x0.size() != n || lambda0.size() != ng || mu0.size() != nh)
    throw Error(ErrorKind::dimension_mismatch, "SQP start point has wrong dimensions");
  if (!x0.allFinite() || !lambda0.allFinite() || !mu0.allFinite())
    throw Error(ErrorKind::evaluation_error, "SQP start point is not finite");

  SqpResult out;
  Vec x = x0, lambda = lambda0, mu = mu0.cwiseMax(0.0);
  std::vector<int> active = warm_active;
  Mat B = Mat::Identity(n, n);
  double nu = 1.0;

  Eval e = evaluate(nlp, x);
  for (int it = 0;; ++it) {
    double res = residual(e, lambda, mu);
    out.residuals.push_back(res);
    if (res <= settings.kkt_tolerance) {
      out.status = SqpStatus::converged;
      break;
    }
    if (it >= settings.max_sqp_iterations) {
      out.status = SqpStatus::max_iterations;
      break;
    }

    Mat H = settings.hessian_mode == HessianMode::exact ? nlp.lagrangian_hessian(x, lambda, mu)
                                                        : B;
    H = 0.5 * (H + H.transpose());
    double tau = inertia_shift(H, null_space(e.Ag, n));
    if (tau > 0) H.diagonal().array() += tau;

    QpResult qp;
    try {
      qp = solve_qp(H, e.grad, e.Ag, -e.g, e.Ah, -e.h, active);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::infeasible_subproblem) throw;
      if (out.restorations >= settings.max_restorations)
        throw Error(ErrorKind::infeasible_subproblem,
                    err.message() + " after " + std::to_string(out.restorations) +
                        " restoration attempts");
      ++out.restorations;
      x += restoration_step(e);
      e = evaluate(nlp, x);
      continue;
    }
    const Vec& d = qp.step;
    active = qp.active;

    double mult = 0.0;
    if (ng) mult = std::max(mult, qp.lambda.cwiseAbs().maxCoeff());
    if (nh) mult = std::max(mult, qp.mu.cwiseAbs().maxCoeff());
    if (nu < 1.1 * mult) nu = std::max(settings.penalty_growth * mult, nu);

    const double viol = violation(e.g, e.h);
    const double phi0 = e.f + nu * viol;
    double D = e.grad.dot(d) - nu * viol;

    double alpha = 1.0;
    bool accepted = false;
    Eval trial;
    for (int ls = 0; ls < 40; ++ls) {
      Vec xt = x + alpha * d;
      try {
        trial = evaluate(nlp, xt);
        double phi = trial.f + nu * violation(trial.g, trial.h);
        if (phi <= phi0 + settings.armijo * alpha * std::min(D, 0.0)) {
          accepted = true;
        } else if (ls == 0) {
          // Full step rejected by the merit function: accept it anyway when it
          // reduces the KKT residual (guards against the Maratos effect).
          if (residual(trial, qp.lambda, qp.mu) <= 0.9 * res) accepted = true;
        }
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::evaluation_error) throw;
      }
      if (accepted) break;
      alpha *= settings.backtrack;
    }
    if (!accepted) {
      // No progress possible along d; take the smallest step to keep iterating
      // deterministically, the iteration cap reports failure.
      alpha = std::pow(settings.backtrack, 40);
      trial = evaluate(nlp, x + alpha * d);
    }

    Vec x_new = x + alpha * d;
    Vec lambda_new = lambda + alpha * (qp.lambda - lambda);
    Vec mu_new = (mu + alpha * (qp.mu - mu)).cwiseMax(0.0);

    if (settings.hessian_mode == HessianMode::quasi_newton) {
      Vec s = x_new - x;
      Vec gl_new = trial.grad, gl_old = e.grad;
      if (ng) {
        gl_new += trial.Ag.transpose() * lambda_new;
        gl_old += e.Ag.transpose() * lambda_new;
      }
      if (nh) {
        gl_new += trial.Ah.transpose() * mu_new;
        gl_old += e.Ah.transpose() * mu_new;
      }
      Vec y = gl_new - gl_old;
      Vec Bs = B * s;
      double sBs = s.dot(Bs);
      double sy = s.dot(y);
      if (sBs > 1e-16) {
        double theta = sy >= 0.2 * sBs ? 1.0 : 0.8 * sBs / (sBs - sy);
        Vec r = theta * y + (1.0 - theta) * Bs;
        B += r * r.transpose() / s.dot(r) - Bs * Bs.transpose() / sBs;
      }
    }

    x = std::move(x_new);
    lambda = std::move(lambda_new);
    mu = std::move(mu_new);
    e = std::move(trial);
    ++out.iterations;
  }

  out.x = x;
  out.lambda = lambda;
  out.mu = mu;
  out.kkt_residual = out.residuals.back();
  out.active = active;
  return out;
}

}  // namespace sbdp
