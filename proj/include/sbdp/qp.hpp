#pragma once

#include <vector>

#include "sbdp/types.hpp"

namespace sbdp {

struct QpResult {
  Vec step;
  Vec lambda;               // equality multipliers
  Vec mu;                   // inequality multipliers, >= 0
  std::vector<int> active;  // active inequality indices, ascending
  int pivots = 0;
};

/// Convex QP
///   min 0.5 d'H d + c'd  s.t.  A_eq d = b_eq,  A_in d <= b_in
/// solved by the Goldfarb-Idnani dual active-set method. Multipliers follow
/// H d + c + A_eq' lambda + A_in' mu = 0. H must be positive definite on the
/// null space of A_eq; it is augmented by rho A_eq'A_eq internally when it is
/// not positive definite on the full space. `warm_active` lists inequality
/// indices tried first when several constraints are violated.
///
/// Throws Error{infeasible_subproblem} for inconsistent constraints,
/// Error{stalled} after 10 n pivots and Error{singular_matrix} when H cannot be
/// made positive definite by augmentation.
QpResult solve_qp(const Mat& H, const Vec& c, const Mat& A_eq, const Vec& b_eq,
                  const Mat& A_in, const Vec& b_in,
                  const std::vector<int>& warm_active = {});

}  // namespace sbdp
