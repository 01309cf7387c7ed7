#pragma once

#include <functional>

#include "sbdp/problem.hpp"

namespace sbdp {

/// Central-difference step used by all fallbacks: max(1e-6, 1e-7 |x|).
inline double fd_step(double x) { return std::max(1e-6, 1e-7 * std::abs(x)); }

/// Central-difference gradient of a scalar function of one vector.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x);
/// Central-difference Jacobian (rows = outputs) of a vector function.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, int rows);

// Agent function evaluation with finite-difference fallback. `block` selects
// the differentiation variable (0 = own, k >= 1 = k-th neighbor).
double eval_objective(const AgentFunctions& a, const Blocks& b);
Vec eval_equality(const AgentFunctions& a, const Blocks& b);
Vec eval_inequality(const AgentFunctions& a, const Blocks& b);
Vec objective_gradient(const AgentFunctions& a, const Blocks& b, int block);
Mat equality_jacobian(const AgentFunctions& a, const Blocks& b, int block);
Mat inequality_jacobian(const AgentFunctions& a, const Blocks& b, int block);

/// Gradient of L_i = f_i + lambda'g_i + mu'h_i with respect to one block.
Vec lagrangian_gradient(const AgentFunctions& a, const Blocks& b, const Vec& lambda,
                        const Vec& mu, int block);

/// Hessian block d^2 L_i / d(block r) d(block c). Uses the user callable when
/// present, otherwise differentiates lagrangian_gradient (analytic or FD).
Mat lagrangian_hessian(const AgentFunctions& a, const Blocks& b, const Vec& lambda,
                       const Vec& mu, int r, int c);

/// Gradient of f_ij + lambda'g_ij + mu'h_ij with respect to x_j.
Vec pair_sensitivity(const PairTerms& t, const Vec& xi, const Vec& xj,
                     const Vec& lambda, const Vec& mu);

}  // namespace sbdp
