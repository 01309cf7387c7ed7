#pragma once

#include <cstdint>
#include <vector>

#include "sbdp/coordinator.hpp"
#include "sbdp/problem.hpp"
#include "sbdp/sqp.hpp"

namespace sbdp {

struct ActiveSetPartition {
  std::vector<std::vector<int>> active;    // |h_k| <= eps_act
  std::vector<std::vector<int>> inactive;  // h_k < -eps_act
};

ActiveSetPartition active_sets(const PartitionedNlp& nlp, const PrimalDualPoint& point,
                               double eps_act = 1e-8);

/// Block-diagonal M(p): per agent [[H_ii, G', A'], [G, 0, 0], [U A, 0, diag(h)]].
Mat build_M(const PartitionedNlp& nlp, const PrimalDualPoint& point, int parallelism = 1);

/// N(p): derivative of the stacked local KKT conditions with respect to the
/// previous iterate.
Mat build_N(const PartitionedNlp& nlp, const PrimalDualPoint& point, int parallelism = 1);

struct JacobianAssembly {
  Mat M, N;
  Mat J;                   // -M^{-1} N restricted to `kept`
  Mat J_full;              // unpruned
  std::vector<int> kept;   // stacked indices retained after pruning
  bool strict_complementarity_ok = true;
  bool inactive_rows_pruned = false;
};

/// J = -M^{-1}N by per-block LU solves. Pruning removes rows and columns of
/// inactive inequalities with mu_k = 0. Throws Error{singular_matrix} naming
/// the agent whose block is singular.
JacobianAssembly jacobian(const PartitionedNlp& nlp, const PrimalDualPoint& point,
                          bool prune_inactive = true, double eps_act = 1e-8,
                          int parallelism = 1);

/// Largest singular value by power iteration on A'A (relative tolerance 1e-10,
/// random restart on stagnation).
double spectral_norm(const Mat& A, std::uint64_t seed = 1);

/// Largest eigenvalue modulus. Columns that are identically zero contribute
/// only zero eigenvalues and are dropped before the dense eigensolve.
double spectral_radius(const Mat& A);

enum class ConvergenceOrder { quadratic, linear, none };
const char* to_string(ConvergenceOrder o);

struct ConvergenceEstimate {
  double jacobian_norm = 0;        // ||J(p*)||_2, pruned
  double unpruned_norm = 0;        // ||J(p*)||_2 without pruning
  double spectral_radius = 0;      // rho(J(p*)), drives order / rate / radius
  double lipschitz_estimate = 0;   // sampled L
  double lipschitz_ball = 0;       // ball radius at which L stabilized
  bool lipschitz_stable = false;
  double radius = 0;               // 2 (1 - rho) / L, conservative
  ConvergenceOrder order = ConvergenceOrder::none;
  double rate = 0;
  double complementarity_margin = 0;  // min active mu (inf if none active)
  double kkt_residual = 0;
};

struct CertifyOptions {
  int sample_pairs = 100;
  double initial_ball = 0.5;
  int max_halvings = 20;
  double eps_act = 1e-8;
  double quadratic_threshold = 1e-8;
  double kkt_tolerance = 1e-6;
  bool estimate_lipschitz = true;
  std::uint64_t seed = 1;
  int parallelism = 1;
};

/// Throws Error{strict_complementarity} when an active constraint has
/// mu_k < eps_act and Error{invalid_parameter} when the point is not KKT.
ConvergenceEstimate certify(const PartitionedNlp& nlp, const PrimalDualPoint& kkt_point,
                            const CertifyOptions& options = {});

ConvergenceOrder classify_order(double rho, double quadratic_threshold = 1e-8);
double convergence_radius(double rho, double lipschitz);

/// C^q = ||x^{q+1} - x*|| / ||x^q - x*|| over the records of a trace, truncated
/// at exact convergence.
std::vector<double> observed_rates(const IterationTrace& trace, const PrimalDualPoint& reference);
std::vector<double> observed_rates(const std::vector<double>& errors);

/// Geometric mean of the last `window` rates taken while the error is above
/// `floor`; used to summarize the asymptotic rate of a run.
double tail_rate(const IterationTrace& trace, const PrimalDualPoint& reference, int window = 5,
                 double floor = 1e-9);

/// Tight local-solve settings used when Phi is differentiated numerically.
SolverSettings oracle_solver_settings();

/// (Phi(p + h d) - Phi(p - h d)) / (2h) with one full SBDP iteration as Phi.
Vec phi_finite_difference(const PartitionedNlp& nlp, const PrimalDualPoint& point,
                          const Vec& direction, double step = 1e-5,
                          const SolverSettings& solver = oracle_solver_settings());


}  // namespace sbdp
