#pragma once

#include "sbdp/problem.hpp"

namespace sbdp {

/// Smooth NLP  min F(x)  s.t.  g(x) = 0,  h(x) <= 0  as consumed by the SQP.
class NlpEvaluator {
 public:
  virtual ~NlpEvaluator() = default;
  virtual int variables() const = 0;
  virtual int equalities() const = 0;
  virtual int inequalities() const = 0;
  virtual double objective(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Vec equality(const Vec& x) const = 0;
  virtual Mat equality_jacobian(const Vec& x) const = 0;
  virtual Vec inequality(const Vec& x) const = 0;
  virtual Mat inequality_jacobian(const Vec& x) const = 0;
  virtual Mat lagrangian_hessian(const Vec& x, const Vec& lambda, const Vec& mu) const = 0;
};

/// Agent i's modified local NLP: neighbors frozen, objective
/// f_i(x, x_N) + s'(x - anchor).
class LocalNlp final : public NlpEvaluator {
 public:
  LocalNlp(const AgentFunctions& fn, std::vector<Vec> neighbor_x, Vec sensitivity, Vec anchor);

  int variables() const override { return fn_.n; }
  int equalities() const override { return fn_.n_eq; }
  int inequalities() const override { return fn_.n_ineq; }
  double objective(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Vec equality(const Vec& x) const override;
  Mat equality_jacobian(const Vec& x) const override;
  Vec inequality(const Vec& x) const override;
  Mat inequality_jacobian(const Vec& x) const override;
  Mat lagrangian_hessian(const Vec& x, const Vec& lambda, const Vec& mu) const override;

 private:
  Blocks blocks(const Vec& x) const;
  const AgentFunctions& fn_;
  std::vector<Vec> neighbor_x_;
  Vec s_, anchor_;
};

/// The central NLP over the stacked primal vector of all agents.
class CentralNlp final : public NlpEvaluator {
 public:
  explicit CentralNlp(const PartitionedNlp& nlp);

  int variables() const override { return n_; }
  int equalities() const override { return ng_; }
  int inequalities() const override { return nh_; }
  double objective(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Vec equality(const Vec& x) const override;
  Mat equality_jacobian(const Vec& x) const override;
  Vec inequality(const Vec& x) const override;
  Mat inequality_jacobian(const Vec& x) const override;
  Mat lagrangian_hessian(const Vec& x, const Vec& lambda, const Vec& mu) const override;

  /// Splits stacked primal/multiplier vectors into a PrimalDualPoint.
  PrimalDualPoint to_point(const Vec& x, const Vec& lambda, const Vec& mu) const;
  void from_point(const PrimalDualPoint& p, Vec& x, Vec& lambda, Vec& mu) const;

 private:
  Blocks blocks(const Vec& x, int i) const;
  const PartitionedNlp& nlp_;
  int n_ = 0, ng_ = 0, nh_ = 0;
  std::vector<int> xo_, go_, ho_;  // per-agent offsets
};

}  // namespace sbdp
