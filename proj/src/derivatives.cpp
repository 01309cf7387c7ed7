#include "sbdp/derivatives.hpp"

#include <cmath>
#include <string>

namespace sbdp {

namespace {

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite())
    throw Error(ErrorKind::evaluation_error, std::string("non-finite value in ") + what);
}

void require_size(const Vec& v, int expected, const char* what) {
  if (v.size() != expected)
    throw Error(ErrorKind::dimension_mismatch,
                std::string(what) + " returned length " + std::to_string(v.size()) +
                    ", expected " + std::to_string(expected));
}

bool has_analytic_gradient(const AgentFunctions& a) {
  return a.objective_gradient && (a.n_eq == 0 || a.equality_jacobian) &&
         (a.n_ineq == 0 || a.inequality_jacobian);
}

// Differentiates a function of one block with the other blocks held fixed.
template <class F>
auto on_block(const Blocks& b, int block, F&& f) {
  return [&b, block, f](const Vec& v) {
    Blocks local = b;
    local[block] = v;
    return f(local);
  };
}

}  // namespace

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
  Vec g(x.size());
  Vec xp = x;
  for (int k = 0; k < x.size(); ++k) {
    double h = fd_step(x(k));
    xp(k) = x(k) + h;
    double fp = f(xp);
    xp(k) = x(k) - h;
    double fm = f(xp);
    xp(k) = x(k);
    g(k) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, int rows) {
  Mat J(rows, x.size());
  Vec xp = x;
  for (int k = 0; k < x.size(); ++k) {
    double h = fd_step(x(k));
    xp(k) = x(k) + h;
    Vec fp = f(xp);
    xp(k) = x(k) - h;
    Vec fm = f(xp);
    xp(k) = x(k);
    J.col(k) = (fp - fm) / (2.0 * h);
  }
  return J;
}

double eval_objective(const AgentFunctions& a, const Blocks& b) {
  double v = a.objective(b);
  if (!std::isfinite(v)) throw Error(ErrorKind::evaluation_error, "non-finite objective value");
  return v;
}

Vec eval_equality(const AgentFunctions& a, const Blocks& b) {
  if (a.n_eq == 0) return Vec(0);
  Vec g = a.equality(b);
  require_size(g, a.n_eq, "equality");
  require_finite(g, "equality");
  return g;
}

Vec eval_inequality(const AgentFunctions& a, const Blocks& b) {
  if (a.n_ineq == 0) return Vec(0);
  Vec h = a.inequality(b);
  require_size(h, a.n_ineq, "inequality");
  require_finite(h, "inequality");
  return h;
}

Vec objective_gradient(const AgentFunctions& a, const Blocks& b, int block) {
  Vec g;
  if (a.objective_gradient)
    g = a.objective_gradient(b, block);
  else
    g = fd_gradient(on_block(b, block, [&a](const Blocks& l) { return a.objective(l); }),
                    b[block]);
  require_size(g, static_cast<int>(b[block].size()), "objective gradient");
  require_finite(g, "objective gradient");
  return g;
}

Mat equality_jacobian(const AgentFunctions& a, const Blocks& b, int block) {
  const int cols = static_cast<int>(b[block].size());
  if (a.n_eq == 0) return Mat(0, cols);
  Mat J = a.equality_jacobian
              ? a.equality_jacobian(b, block)
              : fd_jacobian(on_block(b, block, [&a](const Blocks& l) { return a.equality(l); }),
                            b[block], a.n_eq);
  if (J.rows() != a.n_eq || J.cols() != cols)
    throw Error(ErrorKind::dimension_mismatch, "equality Jacobian has wrong shape");
  if (!J.allFinite()) throw Error(ErrorKind::evaluation_error, "non-finite equality Jacobian");
  return J;
}

Mat inequality_jacobian(const AgentFunctions& a, const Blocks& b, int block) {
  const int cols = static_cast<int>(b[block].size());
  if (a.n_ineq == 0) return Mat(0, cols);
  Mat J = a.inequality_jacobian
              ? a.inequality_jacobian(b, block)
              : fd_jacobian(
                    on_block(b, block, [&a](const Blocks& l) { return a.inequality(l); }),
                    b[block], a.n_ineq);
  if (J.rows() != a.n_ineq || J.cols() != cols)
    throw Error(ErrorKind::dimension_mismatch, "inequality Jacobian has wrong shape");
  if (!J.allFinite()) throw Error(ErrorKind::evaluation_error, "non-finite inequality Jacobian");
  return J;
}

Vec lagrangian_gradient(const AgentFunctions& a, const Blocks& b, const Vec& lambda,
                        const Vec& mu, int block) {
  Vec g = objective_gradient(a, b, block);
  if (a.n_eq > 0) g += equality_jacobian(a, b, block).transpose() * lambda;
  if (a.n_ineq > 0) g += inequality_jacobian(a, b, block).transpose() * mu;
  return g;
}

Mat lagrangian_hessian(const AgentFunctions& a, const Blocks& b, const Vec& lambda,
                       const Vec& mu, int r, int c) {
  const int nr = static_cast<int>(b[r].size());
  const int nc = static_cast<int>(b[c].size());
  Mat H;
  if (a.lagrangian_hessian) {
    H = a.lagrangian_hessian(b, lambda, mu, r, c);
  } else {
    const bool analytic = has_analytic_gradient(a);
    H.resize(nr, nc);
    Blocks pert = b;
    for (int k = 0; k < nc; ++k) {
      double x = b[c](k);
      double h = analytic ? fd_step(x) : 1e-4 * std::max(1.0, std::abs(x));
      pert[c](k) = x + h;
      Vec gp = lagrangian_gradient(a, pert, lambda, mu, r);
      pert[c](k) = x - h;
      Vec gm = lagrangian_gradient(a, pert, lambda, mu, r);
      pert[c](k) = x;
      H.col(k) = (gp - gm) / (2.0 * h);
    }
  }
  if (H.rows() != nr || H.cols() != nc)
    throw Error(ErrorKind::dimension_mismatch, "Lagrangian Hessian block has wrong shape");
  if (!H.allFinite()) throw Error(ErrorKind::evaluation_error, "non-finite Lagrangian Hessian");
  return H;
}

Vec pair_sensitivity(const PairTerms& t, const Vec& xi, const Vec& xj, const Vec& lambda,
                     const Vec& mu) {
  Vec s = Vec::Zero(xj.size());
  if (t.objective) {
    if (t.objective_gradient_j)
      s += t.objective_gradient_j(xi, xj);
    else
      s += fd_gradient([&](const Vec& v) { return t.objective(xi, v); }, xj);
  }
  if (t.equality && lambda.size() > 0) {
    Mat J = t.equality_jacobian_j
                ? t.equality_jacobian_j(xi, xj)
                : fd_jacobian([&](const Vec& v) { return t.equality(xi, v); }, xj,
                              static_cast<int>(lambda.size()));
    s += J.transpose() * lambda;
  }
  if (t.inequality && mu.size() > 0) {
    Mat J = t.inequality_jacobian_j
                ? t.inequality_jacobian_j(xi, xj)
                : fd_jacobian([&](const Vec& v) { return t.inequality(xi, v); }, xj,
                              static_cast<int>(mu.size()));
    s += J.transpose() * mu;
  }
  if (!s.allFinite()) throw Error(ErrorKind::evaluation_error, "non-finite pair sensitivity");
  return s;
}

}  // namespace sbdp
