#pragma once

#include <string>
#include <vector>

#include "sbdp/nlp.hpp"

namespace sbdp {

enum class HessianMode { exact, quasi_newton };

struct SolverSettings {
  double kkt_tolerance = 1e-8;
  int max_sqp_iterations = 100;
  HessianMode hessian_mode = HessianMode::exact;
  double penalty_growth = 2.0;   // merit weight becomes growth * max |multiplier|
  double active_tolerance = 1e-8;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_restorations = 3;

  /// Throws Error{invalid_parameter} naming the offending field.
  void validate() const;
};

enum class SqpStatus { converged, max_iterations };
const char* to_string(SqpStatus s);

struct SqpResult {
  Vec x, lambda, mu;
  SqpStatus status = SqpStatus::max_iterations;
  int iterations = 0;
  double kkt_residual = 0.0;
  std::vector<int> active;         // last QP active set (inequality indices)
  std::vector<double> residuals;   // KKT residual at each iterate
  int restorations = 0;
};

/// Infinity norm of stationarity, g, max(h, 0), |mu h| and max(-mu, 0).
double kkt_residual(const NlpEvaluator& nlp, const Vec& x, const Vec& lambda, const Vec& mu);

/// SQP with exact (or damped BFGS) Hessians, dense active-set QP subproblems
/// and an l1 merit line search. Deterministic for identical inputs.
SqpResult solve_sqp(const NlpEvaluator& nlp, const Vec& x0, const Vec& lambda0, const Vec& mu0,
                    const SolverSettings& settings,
                    const std::vector<int>& warm_active = {});

}  // namespace sbdp
