#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sbdp/problem.hpp"
#include "sbdp/sqp.hpp"

namespace sbdp {

enum class RunMode { general, neighbor_affine };
enum class NormKind { euclidean, infinity };
enum class RunStatus { converged, max_iterations, diverged, aborted };

const char* to_string(RunMode m);
const char* to_string(NormKind n);
const char* to_string(RunStatus s);

struct RunSettings {
  RunMode mode = RunMode::general;
  double eps = 1e-8;
  NormKind norm = NormKind::infinity;
  int max_iterations = 500;
  double alpha = 1.0;  // damping, 1 = undamped
  std::optional<PrimalDualPoint> reference;
  int parallelism = 1;  // 1 = serial reference loop, > 1 = OpenMP workers
  double divergence_threshold = 1e8;
  SolverSettings solver;

  void validate() const;
};

/// grad_{x_to} L_from^{q-1}, sent in the first exchange of the general mode.
struct SensitivityPacket {
  int from = 0, to = 0, q = 0;
  Vec payload;
};

/// x_from^q, plus multipliers in the neighbor-affine mode when the sender's
/// constraints are coupled and the recipient evaluates pair sensitivities.
struct PrimalDualPacket {
  int from = 0, to = 0, q = 0;
  Vec x;
  std::optional<Vec> lambda, mu;

  int floats() const {
    return static_cast<int>(x.size() + (lambda ? lambda->size() : 0) + (mu ? mu->size() : 0));
  }
};

struct IterationRecord {
  int q = 0;
  PrimalDualPoint point;
  double step_norm = 0.0;     // NaN for q = 0
  double kkt_residual = 0.0;  // ||F(p^q)||_inf, omniscient-observer instrumentation
  std::optional<double> error;          // ||p^q - p_ref||_2
  std::optional<double> primal_error;   // ||x^q - x_ref||_2
  std::optional<double> rate;           // primal_error_q / primal_error_{q-1}
  long messages = 0;
  long floats = 0;
  std::vector<long> agent_messages, agent_floats;  // per sender
};

struct IterationTrace {
  std::vector<IterationRecord> records;
};

struct AbortInfo {
  int agent = -1;
  int iteration = 0;
  std::string reason;
};

struct RunResult {
  PrimalDualPoint final_point;
  RunStatus status = RunStatus::max_iterations;
  int iterations = 0;
  IterationTrace trace;
  std::optional<AbortInfo> abort;
};

RunResult run_general(const PartitionedNlp& nlp, const PrimalDualPoint& p0,
                      const RunSettings& settings);
RunResult run_neighbor_affine(const PartitionedNlp& nlp, const PrimalDualPoint& p0,
                              const RunSettings& settings);
/// Dispatches on settings.mode.
RunResult run(const PartitionedNlp& nlp, const PrimalDualPoint& p0, const RunSettings& settings);

double step_norm(const PrimalDualPoint& a, const PrimalDualPoint& b, NormKind norm);
bool stopping_check(const PrimalDualPoint& pq, const PrimalDualPoint& prev,
                    const RunSettings& settings);
PrimalDualPoint damped_update(const PrimalDualPoint& p_new, const PrimalDualPoint& p_prev,
                              double alpha);

/// One undamped SBDP iteration Phi(p) in the general mode. Throws
/// Error{oracle_unavailable} when a local solve fails.
PrimalDualPoint phi_map(const PartitionedNlp& nlp, const PrimalDualPoint& p,
                        const SolverSettings& solver);

/// Per-iteration float-count maxima: sum 2 n_i |N_i| and sum (n_i+n_gi+n_hi)|N_i|.
long general_float_bound(const PartitionedNlp& nlp);
long affine_float_bound(const PartitionedNlp& nlp);

}  // namespace sbdp
