#include "sbdp/local_solver.hpp"

#include <sstream>

#include "sbdp/nlp.hpp"

namespace sbdp {

void LocalProblemInstance::validate(const PartitionedNlp& nlp) const {
  if (agent < 0 || agent >= nlp.agent_count())
    throw Error(ErrorKind::invalid_parameter, "agent index out of range", agent);
  const auto& a = nlp.agents[agent];
  const auto& nb = nlp.graph.neighbors(agent);
  if (neighbor_x.size() != nb.size())
    throw Error(ErrorKind::dimension_mismatch, "wrong number of frozen neighbor blocks", agent,
                "neighbor_x");
  for (size_t k = 0; k < nb.size(); ++k)
    if (neighbor_x[k].size() != nlp.agents[nb[k]].n)
      throw Error(ErrorKind::dimension_mismatch, "frozen neighbor block has wrong length", agent,
                  "neighbor_x");
  if (sensitivity_sum.size() != a.n)
    throw Error(ErrorKind::dimension_mismatch, "sensitivity_sum has wrong length", agent,
                "sensitivity_sum");
  if (anchor.size() != a.n)
    throw Error(ErrorKind::dimension_mismatch, "anchor has wrong length", agent, "anchor");
  if (warm_start.x.size() != a.n || warm_start.lambda.size() != a.n_eq ||
      warm_start.mu.size() != a.n_ineq)
    throw Error(ErrorKind::dimension_mismatch, "warm start has wrong dimensions", agent,
                "warm_start");
}

LocalSolveResult solve_local_nlp(const PartitionedNlp& nlp, const LocalProblemInstance& inst,
                                 const SolverSettings& settings) {
  inst.validate(nlp);
  LocalNlp local(nlp.agents[inst.agent], inst.neighbor_x, inst.sensitivity_sum, inst.anchor);
  SqpResult r = solve_sqp(local, inst.warm_start.x, inst.warm_start.lambda, inst.warm_start.mu,
                          settings, inst.warm_active);
  LocalSolveResult out;
  out.point = {r.x, r.lambda, r.mu};
  out.status = r.status;
  out.iterations = r.iterations;
  out.kkt_residual = r.kkt_residual;
  out.active = std::move(r.active);
  return out;
}

double local_kkt_residual(const PartitionedNlp& nlp, const LocalProblemInstance& inst,
                          const AgentPoint& c) {
  inst.validate(nlp);
  LocalNlp local(nlp.agents[inst.agent], inst.neighbor_x, inst.sensitivity_sum, inst.anchor);
  return kkt_residual(local, c.x, c.lambda, c.mu);
}

PrimalDualPoint solve_central(const PartitionedNlp& nlp, const PrimalDualPoint& start,
                              const SolverSettings& settings, double accept_tolerance) {
  start.check_dimensions(nlp);
  CentralNlp central(nlp);
  Vec x, lambda, mu;
  central.from_point(start, x, lambda, mu);
  SqpResult r = solve_sqp(central, x, lambda, mu, settings);
  if (r.status != SqpStatus::converged &&
      !(r.status == SqpStatus::max_iterations && r.kkt_residual <= accept_tolerance)) {
    std::ostringstream os;
    os << "central SQP did not converge after " << r.iterations
       << " iterations; residual history:";
    const size_t n = r.residuals.size();
    for (size_t k = 0; k < n; ++k) {
      if (n > 10 && k == 5) {
        os << " ...";
        k = n - 5;
      }
      os << ' ' << r.residuals[k];
    }
    throw Error(ErrorKind::not_converged, os.str());
  }
  return central.to_point(r.x, r.lambda, r.mu);
}

}  // namespace sbdp
