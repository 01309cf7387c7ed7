#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sbdp/analysis.hpp"
#include "sbdp/problem.hpp"

namespace sbdp {

enum class Integrator { euler, heun, rk4 };
const char* to_string(Integrator m);
/// Accepts "euler", "heun", "rk4"; implicit schemes are rejected with
/// Error{unsupported_structure}.
Integrator parse_integrator(const std::string& name);

/// One agent of a continuous-time coupled OCP. Dynamics are
///   x' = drift(x, u) + sum_{j in N_i} coupling(x, x_j)
/// and the integral cost is stage_cost(x, u) + sum_j coupling_cost(x, x_j).
/// Jacobian / gradient callables are optional (finite differences otherwise).
struct OcpAgent {
  int nx = 0, nu = 0;
  Vec x0;
  std::optional<Vec> xN;  // terminal equality x^N = xN

  std::function<Vec(const Vec& x, const Vec& u)> drift;
  std::function<void(const Vec& x, const Vec& u, Mat& fx, Mat& fu)> drift_jacobian;
  std::function<Vec(const Vec& x, const Vec& xj)> coupling;
  std::function<void(const Vec& x, const Vec& xj, Mat& fx, Mat& fxj)> coupling_jacobian;

  std::function<double(const Vec& x, const Vec& u)> stage_cost;
  std::function<void(const Vec& x, const Vec& u, Vec& gx, Vec& gu)> stage_cost_gradient;
  std::function<double(const Vec& x, const Vec& xj)> coupling_cost;
  std::function<void(const Vec& x, const Vec& xj, Vec& gx, Vec& gxj)> coupling_cost_gradient;
  std::function<double(const Vec& x)> terminal_cost;
  std::function<Vec(const Vec& x)> terminal_cost_gradient;

  /// Box constraints; empty vectors mean unbounded, infinite entries are skipped.
  Vec x_lower, x_upper, u_lower, u_upper;
};

struct ContinuousOcp {
  CouplingGraph graph;
  std::vector<OcpAgent> agents;
  double horizon = 1.0;
  /// true: cost V + dt * sum_k l; false: V + sum_k l.
  bool integrate_stage_cost = true;
  /// Emit the neighbor-affine split when the discretization admits it.
  bool neighbor_affine = true;

  void validate() const;
};

struct StageIndex {
  enum class Kind { state, input } kind = Kind::state;
  int stage = 0;
  int component = 0;
};

struct DiscretizedOcp {
  PartitionedNlp nlp;
  int N = 0;
  double dt = 0.0;
  double horizon = 0.0;
  Integrator integrator = Integrator::euler;
  std::vector<int> nx, nu;
  /// Empty when the affine form was produced; otherwise the reason it was not.
  std::string affine_note;

  int state_index(int agent, int k, int component) const;
  int input_index(int agent, int k, int component) const;
  StageIndex locate(int agent, int flat) const;
};

/// Direct transcription with neighbor states and inputs held constant over
/// each interval, including inside multi-stage schemes.
DiscretizedOcp discretize(const ContinuousOcp& ocp, int N, Integrator integrator);

/// Start point: states interpolated linearly from x0 to xN (or held at x0),
/// zero inputs and multipliers.
PrimalDualPoint initial_guess(const DiscretizedOcp& d, const ContinuousOcp& ocp);

/// One explicit step increment f^d with its Jacobians in x, u and each
/// neighbor state (neighbors in the order given).
struct StepIncrement {
  Vec f;
  Mat fx, fu;
  std::vector<Mat> fn;
};
StepIncrement step_increment(const OcpAgent& a, Integrator m, double dt, const Vec& x,
                             const Vec& u, const std::vector<Vec>& neighbors,
                             bool jacobians = true);

/// sqrt(4r / (2|w| - q)) when 2|w| > q, none otherwise.
std::optional<double> closed_form_tmax_integrator(double q, double r, double w);

struct SweepRow {
  double T = 0;
  bool available = false;
  double norm = 0;             // pruned ||J(p*(T))||_2
  double spectral_radius = 0;  // rho(J(p*(T)))
  bool converges = false;      // rho < 1
  ConvergenceOrder order = ConvergenceOrder::none;
  bool complementarity_ok = true;
  std::string note;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ascending T
  /// Largest grid T such that every available row up to it converges.
  std::optional<double> empirical_tmax;
};

using CentralSolver =
    std::function<PrimalDualPoint(const PartitionedNlp&, const PrimalDualPoint& warm)>;

/// For each T: discretize with fixed N, solve centrally (warm-started from the
/// previous T), assemble the pruned Jacobian and classify convergence.
SweepResult horizon_sweep(const ContinuousOcp& ocp, int N, std::vector<double> grid,
                          Integrator integrator, CentralSolver solver = {},
                          int parallelism = 1);

std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace sbdp
