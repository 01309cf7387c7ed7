#include "sbdp/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sbdp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Dual active-set solver state. Constraints are stored in ">=" form
// n_p'x >= b_p; equalities use the same normal with equality enforced.
// Invariant: J'N_active = [R; 0] with J = L^{-T} rotated by Givens steps.
struct GoldfarbIdnani {
  int n, me, mi;
  const Mat& A_eq;
  const Vec& b_eq;
  const Mat& A_in;
  const Vec& b_in;

  Mat J, R;
  Vec x, u, d, z, r;
  std::vector<int> active;  // constraint ids: e < me equality, me + k inequality
  int q = 0;
  int pivots = 0;

  GoldfarbIdnani(const Mat& aeq, const Vec& beq, const Mat& ain, const Vec& bin)
      : n(static_cast<int>(aeq.cols())), me(static_cast<int>(aeq.rows())),
        mi(static_cast<int>(ain.rows())), A_eq(aeq), b_eq(beq), A_in(ain), b_in(bin) {}

  Vec normal(int id) const {
    if (id < me) return A_eq.row(id).transpose();
    return -A_in.row(id - me).transpose();
  }
  double rhs(int id) const { return id < me ? b_eq(id) : -b_in(id - me); }
  double slack(int id) const { return normal(id).dot(x) - rhs(id); }
  double tolerance(int id) const {
    return 1e-11 * std::max({1.0, std::abs(rhs(id)), normal(id).norm() * x.norm()});
  }

  // d = J'n, z = J2 d2 (primal direction), r = R^{-1} d1 (dual direction).
  void directions(const Vec& np) {
    d = J.transpose() * np;
    z = J.rightCols(n - q) * d.tail(n - q);
    r = R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));
  }

  bool dependent() const {
    return d.tail(n - q).norm() <= 1e-12 * std::max(d.norm(), 1e-300);
  }

  void add_constraint(int id) {
    for (int j = n - 1; j > q; --j) {
      double a = d(j - 1), b = d(j);
      if (b == 0.0) continue;
      double h = std::hypot(a, b);
      double cc = a / h, ss = b / h;
      d(j - 1) = h;
      d(j) = 0.0;
      for (int k = 0; k < n; ++k) {
        double t1 = J(k, j - 1), t2 = J(k, j);
        J(k, j - 1) = cc * t1 + ss * t2;
        J(k, j) = -ss * t1 + cc * t2;
      }
    }
    R.col(q).head(q + 1) = d.head(q + 1);
    R.col(q).tail(n - q - 1).setZero();
    active.push_back(id);
    ++q;
    ++pivots;
  }

  void drop_constraint(int pos) {
    for (int c = pos; c < q - 1; ++c) {
      R.col(c) = R.col(c + 1);
      u(c) = u(c + 1);
    }
    active.erase(active.begin() + pos);
    --q;
    R.col(q).setZero();
    for (int k = pos; k < q; ++k) {
      double a = R(k, k), b = R(k + 1, k);
      if (b == 0.0) continue;
      double h = std::hypot(a, b);
      double cc = a / h, ss = b / h;
      for (int c = k; c < q; ++c) {
        double t1 = R(k, c), t2 = R(k + 1, c);
        R(k, c) = cc * t1 + ss * t2;
        R(k + 1, c) = -ss * t1 + cc * t2;
      }
      R(k + 1, k) = 0.0;
      for (int row = 0; row < n; ++row) {
        double t1 = J(row, k), t2 = J(row, k + 1);
        J(row, k) = cc * t1 + ss * t2;
        J(row, k + 1) = -ss * t1 + cc * t2;
      }
    }
    ++pivots;
  }

  void check_pivots() const {
    if (pivots > 10 * std::max(n, 1) + me)
      throw Error(ErrorKind::stalled,
                  "QP active-set cycling guard triggered after " +
                      std::to_string(pivots) + " pivots");
  }
};

// Stationarity and active-row feasibility of a QP result.
double kkt_error(const Mat& G, const Vec& c, const Mat& Aeq, const Vec& beq, const Mat& Ain,
                 const Vec& bin, const QpResult& r) {
  Vec stat = G * r.step + c;
  if (Aeq.rows()) stat += Aeq.transpose() * r.lambda;
  if (Ain.rows()) stat += Ain.transpose() * r.mu;
  double e = stat.lpNorm<Eigen::Infinity>();
  if (Aeq.rows()) e = std::max(e, (Aeq * r.step - beq).lpNorm<Eigen::Infinity>());
  for (int k : r.active) e = std::max(e, std::abs(Ain.row(k).dot(r.step) - bin(k)));
  return e;
}

// Re-solves the equality-constrained QP on the final working set with an LU
// factorization and one refinement step. The dual method accumulates roundoff
// through its factor updates, which matters when multipliers are large.
void polish(const Mat& G, const Vec& c, const Mat& Aeq, const Vec& beq, const Mat& Ain,
            const Vec& bin, QpResult& r) {
  const int n = static_cast<int>(G.rows());
  const int me = static_cast<int>(Aeq.rows());
  const int ma = static_cast<int>(r.active.size());
  const int m = me + ma;
  if (m > n) return;
  Mat W(m, n);
  Vec w(m);
  if (me) {
    W.topRows(me) = Aeq;
    w.head(me) = beq;
  }
  for (int k = 0; k < ma; ++k) {
    W.row(me + k) = Ain.row(r.active[k]);
    w(me + k) = bin(r.active[k]);
  }
  Mat K = Mat::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = G;
  K.topRightCorner(n, m) = W.transpose();
  K.bottomLeftCorner(m, n) = W;
  Vec rhs(n + m);
  rhs << -c, w;
  Eigen::PartialPivLU<Mat> lu(K);
  Vec sol = lu.solve(rhs);
  sol += lu.solve(rhs - K * sol);
  if (!sol.allFinite()) return;

  QpResult p = r;
  p.step = sol.head(n);
  p.lambda = sol.segment(n, me);
  for (int k = 0; k < ma; ++k) {
    const double mu = sol(n + me + k);
    if (mu < 0.0) return;
    p.mu(r.active[k]) = mu;
  }
  const double scale = 1.0 + p.step.lpNorm<Eigen::Infinity>();
  for (int k = 0; k < Ain.rows(); ++k)
    if (Ain.row(k).dot(p.step) - bin(k) > 1e-9 * scale) return;
  if (kkt_error(G, c, Aeq, beq, Ain, bin, p) < kkt_error(G, c, Aeq, beq, Ain, bin, r)) r = p;
}

}  // namespace

QpResult solve_qp(const Mat& H, const Vec& c, const Mat& A_eq, const Vec& b_eq,
                  const Mat& A_in, const Vec& b_in, const std::vector<int>& warm_active) {
  const int n = static_cast<int>(H.rows());
  if (H.cols() != n || c.size() != n || A_eq.cols() != (A_eq.rows() ? n : A_eq.cols()) ||
      A_in.cols() != (A_in.rows() ? n : A_in.cols()) || b_eq.size() != A_eq.rows() ||
      b_in.size() != A_in.rows())
    throw Error(ErrorKind::dimension_mismatch, "solve_qp: inconsistent QP dimensions");

  const int me = static_cast<int>(A_eq.rows());
  const int mi = static_cast<int>(A_in.rows());
  Mat Aeq = me ? A_eq : Mat(0, n);
  Mat Ain = mi ? A_in : Mat(0, n);

  // Positive definiteness on the full space via equality augmentation. The
  // shifted linear term keeps the QP identical on the feasible set.
  Mat G = 0.5 * (H + H.transpose());
  Vec c_aug = c;
  Eigen::LLT<Mat> llt(G);
  if (llt.info() != Eigen::Success) {
    bool ok = false;
    if (me > 0) {
      double rho = std::max(1.0, G.cwiseAbs().maxCoeff());
      Mat AtA = Aeq.transpose() * Aeq;
      for (int attempt = 0; attempt < 10 && !ok; ++attempt, rho *= 10.0) {
        llt.compute(G + rho * AtA);
        if (llt.info() == Eigen::Success) {
          ok = true;
          c_aug = c - rho * Aeq.transpose() * b_eq;
        }
      }
    }
    if (!ok)
      throw Error(ErrorKind::singular_matrix,
                  "solve_qp: Hessian is not positive definite on the equality null space");
  }

  GoldfarbIdnani gi(Aeq, b_eq, Ain, b_in);
  Mat Lt = llt.matrixU();
  gi.J = Lt.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  gi.R = Mat::Zero(n, n);
  gi.u = Vec::Zero(n + 1);
  gi.x = -gi.J * (gi.J.transpose() * c_aug);

  // Equalities are always active.
  for (int e = 0; e < me; ++e) {
    Vec np = gi.normal(e);
    gi.directions(np);
    double s = gi.slack(e);
    if (gi.dependent()) {
      if (std::abs(s) <= gi.tolerance(e)) continue;
      throw Error(ErrorKind::infeasible_subproblem,
                  "solve_qp: inconsistent equality constraints (row " + std::to_string(e) + ")");
    }
    double t2 = -s / gi.z.dot(np);
    gi.x += t2 * gi.z;
    gi.u.head(gi.q) -= t2 * gi.r;
    gi.u(gi.q) = t2;
    gi.add_constraint(e);
  }
  gi.pivots = 0;

  std::vector<char> in_warm(mi, 0);
  for (int k : warm_active)
    if (k >= 0 && k < mi) in_warm[k] = 1;

  auto is_active = [&](int id) {
    return std::find(gi.active.begin(), gi.active.end(), id) != gi.active.end();
  };

  while (true) {
    // Choose the most violated inequality, preferring the warm set.
    int p = -1, p_warm = -1;
    double worst = 0.0, worst_warm = 0.0;
    for (int k = 0; k < mi; ++k) {
      int id = me + k;
      if (is_active(id)) continue;
      double s = gi.slack(id);
      if (s >= -gi.tolerance(id)) continue;
      double scaled = s / std::max(gi.normal(id).norm(), 1e-300);
      if (scaled < worst) {
        worst = scaled;
        p = id;
      }
      if (in_warm[k] && scaled < worst_warm) {
        worst_warm = scaled;
        p_warm = id;
      }
    }
    if (p_warm >= 0) p = p_warm;
    if (p < 0) break;

    Vec np = gi.normal(p);
    double u_plus = 0.0;
    while (true) {
      gi.check_pivots();
      gi.directions(np);
      double sp = gi.slack(p);

      double t1 = inf;
      int drop = -1;
      for (int j = 0; j < gi.q; ++j) {
        if (gi.active[j] < me) continue;
        if (gi.r(j) > 0.0) {
          double ratio = gi.u(j) / gi.r(j);
          if (ratio < t1) {
            t1 = ratio;
            drop = j;
          }
        }
      }
      double t2 = inf;
      if (!gi.dependent()) {
        double zn = gi.z.dot(np);
        if (zn > 0.0) t2 = -sp / zn;
      }
      if (t1 == inf && t2 == inf)
        throw Error(ErrorKind::infeasible_subproblem,
                    "solve_qp: infeasible inequality constraints (row " +
                        std::to_string(p - me) + ")");
      if (t2 == inf) {
        gi.u.head(gi.q) -= t1 * gi.r;
        u_plus += t1;
        gi.drop_constraint(drop);
        continue;
      }
      double t = std::min(t1, t2);
      gi.x += t * gi.z;
      gi.u.head(gi.q) -= t * gi.r;
      u_plus += t;
      if (t2 <= t1) {
        gi.u(gi.q) = u_plus;
        gi.add_constraint(p);
        break;
      }
      gi.drop_constraint(drop);
    }
  }

  QpResult out;
  out.step = gi.x;
  out.lambda = Vec::Zero(me);
  out.mu = Vec::Zero(mi);
  for (int j = 0; j < gi.q; ++j) {
    int id = gi.active[j];
    if (id < me)
      out.lambda(id) = -gi.u(j);
    else {
      out.mu(id - me) = std::max(gi.u(j), 0.0);
      out.active.push_back(id - me);
    }
  }
  std::sort(out.active.begin(), out.active.end());
  out.pivots = gi.pivots;
  polish(G, c, Aeq, b_eq, Ain, b_in, out);
  return out;
}

}  // namespace sbdp
