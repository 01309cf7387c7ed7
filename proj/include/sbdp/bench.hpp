#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbdp/ocp.hpp"
#include "sbdp/problem.hpp"
#include "sbdp/sqp.hpp"

namespace sbdp {

/// Built-in benchmark request. Overrides are parameter name -> value text;
/// unknown names are rejected with Error{config_error}. An empty initializer
/// selects the benchmark's default start point.
struct BenchmarkSpec {
  std::string id;
  std::map<std::string, std::string> overrides;
  std::string initializer;
};

struct BenchmarkInstance {
  std::string id;
  PartitionedNlp nlp;
  std::optional<ContinuousOcp> ocp;  // OCP benchmarks only
  int N = 0;
  Integrator integrator = Integrator::euler;
  std::string affine_note;
  PrimalDualPoint initial;
  /// Known analytic minima (stacked primal vectors), when available.
  std::vector<Vec> reference_minima;
  /// Every parameter with its resolved value, for reports.
  std::map<std::string, std::string> parameters;
  /// Mode the benchmark is meant to be run in.
  std::string preferred_mode;
};

const std::vector<std::string>& benchmark_ids();

/// Lists the accepted override names of one benchmark.
std::vector<std::string> benchmark_parameters(const std::string& id);

/// Throws Error{unknown_benchmark} listing the valid ids.
BenchmarkInstance instantiate(const BenchmarkSpec& spec);

/// Central SQP solve used as reference p*. Residual target 1e-10.
PrimalDualPoint central_solve(const PartitionedNlp& nlp, const PrimalDualPoint& start);

}  // namespace sbdp
