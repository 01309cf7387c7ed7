#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbdp/bench.hpp"

namespace sbdp {

/// JSON configuration flattened to dotted keys: {"run": {"eps": 1e-8}} is
/// read as "run.eps". Leaves are kept as text (arrays as JSON text).
class Config {
 public:
  static Config parse(const std::string& json_text, const std::string& origin = "config");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::optional<std::string> text(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  std::optional<int> integer(const std::string& key) const;
  std::optional<bool> flag(const std::string& key) const;
  std::optional<std::vector<double>> numbers(const std::string& key) const;

  /// Entries under "prefix." with the prefix stripped.
  std::map<std::string, std::string> section(const std::string& prefix) const;

  /// Rejects keys that are neither listed nor under a listed "prefix.*".
  void check_known(const std::vector<std::string>& known) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::string origin_ = "config";
  std::map<std::string, std::string> values_;
};

/// Problem-definition file: a built-in benchmark id with overrides, plus the
/// structure it is expected to have (agent count, 0-based neighbor lists and
/// per-agent n, n_eq, n_ineq), which is checked against the instantiation.
struct ProblemDefinition {
  BenchmarkSpec spec;
  std::optional<int> agents;
  std::optional<std::vector<std::vector<int>>> neighbors;
  std::vector<std::vector<int>> dimensions;  // {n, n_eq, n_ineq} per agent
};

ProblemDefinition parse_problem_definition(const std::string& json_text);
ProblemDefinition load_problem_definition(const std::string& path);
/// Throws Error{config_error} describing the first mismatch.
void check_problem_definition(const ProblemDefinition& def, const PartitionedNlp& nlp);

}  // namespace sbdp
