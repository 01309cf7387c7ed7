#include "sbdp/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <set>
#include <string>

#include "sbdp/derivatives.hpp"
#include "sbdp/local_solver.hpp"
#include "sbdp/model.hpp"
#include "parallel.hpp"

namespace sbdp {

const char* to_string(RunMode m) {
  return m == RunMode::general ? "general" : "neighbor-affine";
}
const char* to_string(NormKind n) { return n == NormKind::infinity ? "infinity" : "euclidean"; }
const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iterations: return "max_iterations";
    case RunStatus::diverged: return "diverged";
    case RunStatus::aborted: return "aborted";
  }
  return "?";
}

void RunSettings::validate() const {
  auto bad = [](const char* field, const char* why) {
    throw Error(ErrorKind::invalid_parameter, std::string(field) + " " + why, -1, field);
  };
  if (!(eps > 0)) bad("eps", "must be positive");
  if (!(alpha > 0 && alpha <= 1)) bad("alpha", "must lie in (0, 1]");
  if (max_iterations < 1) bad("max_iterations", "must be at least 1");
  if (parallelism < 1) bad("parallelism", "must be at least 1");
  if (!(divergence_threshold > 0)) bad("divergence_threshold", "must be positive");
  solver.validate();
}

double step_norm(const PrimalDualPoint& a, const PrimalDualPoint& b, NormKind norm) {
  if (a.agents.size() != b.agents.size())
    throw Error(ErrorKind::dimension_mismatch, "step_norm: points differ in agent count");
  double acc = 0.0;
  for (size_t i = 0; i < a.agents.size(); ++i) {
    const auto& x = a.agents[i];
    const auto& y = b.agents[i];
    if (x.x.size() != y.x.size() || x.lambda.size() != y.lambda.size() ||
        x.mu.size() != y.mu.size())
      throw Error(ErrorKind::dimension_mismatch, "step_norm: block sizes differ",
                  static_cast<int>(i));
    // Each agent evaluates its own part; the coordinator only combines scalars.
    if (norm == NormKind::infinity) {
      double local = 0.0;
      if (x.x.size()) local = std::max(local, (x.x - y.x).cwiseAbs().maxCoeff());
      if (x.lambda.size()) local = std::max(local, (x.lambda - y.lambda).cwiseAbs().maxCoeff());
      if (x.mu.size()) local = std::max(local, (x.mu - y.mu).cwiseAbs().maxCoeff());
      if (std::isnan(local)) return std::numeric_limits<double>::quiet_NaN();
      acc = std::max(acc, local);
    } else {
      acc += (x.x - y.x).squaredNorm() + (x.lambda - y.lambda).squaredNorm() +
             (x.mu - y.mu).squaredNorm();
    }
  }
  return norm == NormKind::infinity ? acc : std::sqrt(acc);
}

bool stopping_check(const PrimalDualPoint& pq, const PrimalDualPoint& prev,
                    const RunSettings& settings) {
  return step_norm(pq, prev, settings.norm) <= settings.eps;
}

PrimalDualPoint damped_update(const PrimalDualPoint& p_new, const PrimalDualPoint& p_prev,
                              double alpha) {
  if (!(alpha > 0 && alpha <= 1))
    throw Error(ErrorKind::invalid_parameter, "damping alpha must lie in (0, 1]");
  if (alpha == 1.0) return p_new;
  PrimalDualPoint out = p_new;
  for (size_t i = 0; i < out.agents.size(); ++i) {
    auto& o = out.agents[i];
    const auto& p = p_prev.agents[i];
    o.x = alpha * p_new.agents[i].x + (1.0 - alpha) * p.x;
    o.lambda = alpha * p_new.agents[i].lambda + (1.0 - alpha) * p.lambda;
    o.mu = alpha * p_new.agents[i].mu + (1.0 - alpha) * p.mu;
  }
  return out;
}

long general_float_bound(const PartitionedNlp& nlp) {
  long total = 0;
  for (int i = 0; i < nlp.agent_count(); ++i)
    total += 2L * nlp.agents[i].n * static_cast<long>(nlp.graph.neighbors(i).size());
  return total;
}

long affine_float_bound(const PartitionedNlp& nlp) {
  long total = 0;
  for (int i = 0; i < nlp.agent_count(); ++i)
    total += static_cast<long>(nlp.block_size(i)) *
             static_cast<long>(nlp.graph.neighbors(i).size());
  return total;
}

namespace {

// Barrier-synchronized in-process bus. Each worker writes only to its own
// outbox; delivery happens at the barrier in ascending sender order.
template <class Packet>
class MessageBus {
 public:
  explicit MessageBus(int agents) : outbox_(agents), inbox_(agents), floats_(agents, 0),
                                    messages_(agents, 0) {}

  void post(int sender, Packet p) { outbox_[sender].push_back(std::move(p)); }

  void barrier(const std::function<long(const Packet&)>& size) {
    for (auto& in : inbox_) in.clear();
    for (size_t s = 0; s < outbox_.size(); ++s) {
      for (auto& p : outbox_[s]) {
        floats_[s] += size(p);
        messages_[s] += 1;
        inbox_[p.to].push_back(std::move(p));
      }
      outbox_[s].clear();
    }
  }

  const std::vector<Packet>& inbox(int agent) const { return inbox_[agent]; }
  std::vector<long>& floats() { return floats_; }
  std::vector<long>& messages() { return messages_; }

 private:
  std::vector<std::vector<Packet>> outbox_, inbox_;
  std::vector<long> floats_, messages_;
};

struct AgentState {
  AgentPoint own;
  std::vector<Vec> neighbor_x;     // x_j for j in N_i
  std::vector<Vec> dependent_x;    // x_k for k in O_i (neighbor-affine mode)
  std::vector<Vec> dependent_lambda, dependent_mu;
  std::vector<int> warm_active;
};

class Runner {
 public:
  Runner(const PartitionedNlp& nlp, const PrimalDualPoint& p0, const RunSettings& s)
      : nlp_(nlp), s_(s), M_(nlp.agent_count()), state_(M_), errors_(M_) {
    nlp.check_structure();
    s.validate();
    p0.check_dimensions(nlp);
    for (int i = 0; i < M_; ++i) {
      const auto& ap = p0.agents[i];
      if (!ap.x.allFinite() || !ap.lambda.allFinite() || !ap.mu.allFinite())
        throw Error(ErrorKind::evaluation_error, "initial point is not finite", i);
      state_[i].own = ap;
    }
    if (s.reference) s.reference->check_dimensions(nlp);
    affine_ = s.mode == RunMode::neighbor_affine;
    if (affine_ && !nlp.affine_form)
      throw Error(ErrorKind::unsupported_structure,
                  "neighbor-affine mode requires an affine_form");
  }

  RunResult execute() {
    RunResult out;
    IterationRecord rec0;
    rec0.q = 0;
    rec0.point = snapshot();
    rec0.step_norm = std::numeric_limits<double>::quiet_NaN();
    initial_exchange(rec0);
    instrument(rec0, nullptr);
    out.trace.records.push_back(std::move(rec0));

    out.status = RunStatus::max_iterations;
    for (int q = 1; q <= s_.max_iterations; ++q) {
      PrimalDualPoint prev = out.trace.records.back().point;
      IterationRecord rec;
      rec.q = q;
      bool ok = affine_ ? iterate_affine(q, rec) : iterate_general(q, rec);
      out.iterations = q;
      if (!ok) {
        int agent = detail::first_error(errors_);
        out.status = RunStatus::aborted;
        out.abort = AbortInfo{agent, q, errors_[agent]};
        out.final_point = prev;
        return out;
      }
      rec.point = snapshot();
      rec.step_norm = step_norm(rec.point, prev, s_.norm);
      bool finite = std::isfinite(rec.step_norm);
      if (finite) {
        instrument(rec, &out.trace.records.back());
      } else {
        rec.kkt_residual = std::numeric_limits<double>::quiet_NaN();
      }
      double sn = rec.step_norm;
      out.trace.records.push_back(std::move(rec));
      if (!finite || sn > s_.divergence_threshold) {
        out.status = RunStatus::diverged;
        break;
      }
      if (sn <= s_.eps) {
        out.status = RunStatus::converged;
        break;
      }
    }
    out.final_point = out.trace.records.back().point;
    return out;
  }

 private:
  PrimalDualPoint snapshot() const {
    PrimalDualPoint p;
    p.agents.reserve(M_);
    for (const auto& st : state_) p.agents.push_back(st.own);
    return p;
  }

  void instrument(IterationRecord& rec, const IterationRecord* prev) const {
    try {
      Vec F = central_kkt_residual(nlp_, rec.point);
      rec.kkt_residual = F.size() ? F.cwiseAbs().maxCoeff() : 0.0;
    } catch (const Error&) {
      rec.kkt_residual = std::numeric_limits<double>::quiet_NaN();
    }
    if (s_.reference) {
      rec.error = (rec.point.stacked() - s_.reference->stacked()).norm();
      rec.primal_error = (rec.point.primal() - s_.reference->primal()).norm();
      if (prev && prev->primal_error && *prev->primal_error > 0.0)
        rec.rate = *rec.primal_error / *prev->primal_error;
    }
  }

  void record_counts(IterationRecord& rec, std::vector<long>& floats,
                     std::vector<long>& messages) {
    rec.agent_floats = floats;
    rec.agent_messages = messages;
    rec.floats = 0;
    rec.messages = 0;
    for (int i = 0; i < M_; ++i) {
      rec.floats += floats[i];
      rec.messages += messages[i];
    }
  }

  // x_i to every agent freezing it, plus multipliers for pair sensitivities.
  void post_primal(MessageBus<PrimalDualPacket>& bus, int i, int q) {
    const auto& nb = nlp_.graph.neighbors(i);
    const auto& dep = nlp_.graph.dependents(i);
    std::set<int> recipients(dep.begin(), dep.end());
    if (affine_) recipients.insert(nb.begin(), nb.end());
    const auto* af = affine_ ? &(*nlp_.affine_form)[i] : nullptr;
    for (int r : recipients) {
      PrimalDualPacket p;
      p.from = i;
      p.to = r;
      p.q = q;
      p.x = state_[i].own.x;
      if (affine_ && nlp_.graph.has_edge(i, r)) {
        if (af->equality_coupled()) p.lambda = state_[i].own.lambda;
        if (af->inequality_coupled()) p.mu = state_[i].own.mu;
      }
      bus.post(i, std::move(p));
    }
  }

  void receive_primal(const MessageBus<PrimalDualPacket>& bus, int k) {
    auto& st = state_[k];
    for (const auto& p : bus.inbox(k)) {
      int s = nlp_.graph.slot(k, p.from);
      if (s >= 0) st.neighbor_x[s] = p.x;
      if (affine_) {
        const auto& dep = nlp_.graph.dependents(k);
        auto it = std::find(dep.begin(), dep.end(), p.from);
        if (it != dep.end()) {
          size_t d = it - dep.begin();
          st.dependent_x[d] = p.x;
          if (p.lambda) st.dependent_lambda[d] = *p.lambda;
          if (p.mu) st.dependent_mu[d] = *p.mu;
        }
      }
    }
  }

  void initial_exchange(IterationRecord& rec) {
    for (int i = 0; i < M_; ++i) {
      auto& st = state_[i];
      st.neighbor_x.assign(nlp_.graph.neighbors(i).size(), Vec());
      const auto& dep = nlp_.graph.dependents(i);
      st.dependent_x.assign(dep.size(), Vec());
      st.dependent_lambda.assign(dep.size(), Vec(0));
      st.dependent_mu.assign(dep.size(), Vec(0));
    }
    MessageBus<PrimalDualPacket> bus(M_);
    for (int i = 0; i < M_; ++i) post_primal(bus, i, 0);
    bus.barrier([](const PrimalDualPacket& p) { return static_cast<long>(p.floats()); });
    for (int k = 0; k < M_; ++k) receive_primal(bus, k);
    record_counts(rec, bus.floats(), bus.messages());
  }

  bool local_step(int i, const Vec& s) {
    auto& st = state_[i];
    LocalProblemInstance inst;
    inst.agent = i;
    inst.neighbor_x = st.neighbor_x;
    inst.sensitivity_sum = s;
    inst.anchor = st.own.x;
    inst.warm_start = st.own;
    inst.warm_active = st.warm_active;
    LocalSolveResult r = solve_local_nlp(nlp_, inst, s_.solver);
    if (r.status != SqpStatus::converged)
      throw Error(ErrorKind::not_converged,
                  "local SQP hit the iteration cap (residual " + std::to_string(r.kkt_residual) +
                      ")",
                  i);
    st.warm_active = r.active;
    if (s_.alpha == 1.0) {
      st.own = std::move(r.point);
    } else {
      const double a = s_.alpha;
      st.own.x = a * r.point.x + (1 - a) * st.own.x;
      st.own.lambda = a * r.point.lambda + (1 - a) * st.own.lambda;
      st.own.mu = a * r.point.mu + (1 - a) * st.own.mu;
    }
    return true;
  }

  bool iterate_general(int q, IterationRecord& rec) {
    MessageBus<SensitivityPacket> sbus(M_);
    errors_ = detail::parallel_for(M_, s_.parallelism, [&](int i) {
      const auto& nb = nlp_.graph.neighbors(i);
      Blocks b{state_[i].own.x};
      for (const auto& v : state_[i].neighbor_x) b.push_back(v);
      for (size_t k = 0; k < nb.size(); ++k)
        sbus.post(i, {i, nb[k], q,
                      lagrangian_gradient(nlp_.agents[i], b, state_[i].own.lambda,
                                          state_[i].own.mu, static_cast<int>(k) + 1)});
    });
    if (detail::first_error(errors_) >= 0) return false;
    sbus.barrier([](const SensitivityPacket& p) { return static_cast<long>(p.payload.size()); });

    errors_ = detail::parallel_for(M_, s_.parallelism, [&](int i) {
      Vec s = Vec::Zero(nlp_.agents[i].n);
      for (const auto& p : sbus.inbox(i)) s += p.payload;
      local_step(i, s);
    });
    if (detail::first_error(errors_) >= 0) return false;

    MessageBus<PrimalDualPacket> pbus(M_);
    for (int i = 0; i < M_; ++i) post_primal(pbus, i, q);
    pbus.barrier([](const PrimalDualPacket& p) { return static_cast<long>(p.floats()); });
    for (int k = 0; k < M_; ++k) receive_primal(pbus, k);

    std::vector<long> floats(M_), messages(M_);
    for (int i = 0; i < M_; ++i) {
      floats[i] = sbus.floats()[i] + pbus.floats()[i];
      messages[i] = sbus.messages()[i] + pbus.messages()[i];
    }
    record_counts(rec, floats, messages);
    return true;
  }

  bool iterate_affine(int q, IterationRecord& rec) {
    const auto& af = *nlp_.affine_form;
    errors_ = detail::parallel_for(M_, s_.parallelism, [&](int i) {
      auto& st = state_[i];
      const auto& dep = nlp_.graph.dependents(i);
      Vec s = Vec::Zero(nlp_.agents[i].n);
      for (size_t d = 0; d < dep.size(); ++d) {
        int k = dep[d];
        s += pair_sensitivity(af[k].pairs[nlp_.graph.slot(k, i)], st.dependent_x[d], st.own.x,
                              st.dependent_lambda[d], st.dependent_mu[d]);
      }
      local_step(i, s);
    });
    if (detail::first_error(errors_) >= 0) return false;

    MessageBus<PrimalDualPacket> bus(M_);
    for (int i = 0; i < M_; ++i) post_primal(bus, i, q);
    bus.barrier([](const PrimalDualPacket& p) { return static_cast<long>(p.floats()); });
    for (int k = 0; k < M_; ++k) receive_primal(bus, k);
    record_counts(rec, bus.floats(), bus.messages());
    return true;
  }

  const PartitionedNlp& nlp_;
  const RunSettings& s_;
  int M_;
  bool affine_ = false;
  std::vector<AgentState> state_;
  std::vector<std::string> errors_;
};

}  // namespace

RunResult run_general(const PartitionedNlp& nlp, const PrimalDualPoint& p0,
                      const RunSettings& settings) {
  RunSettings s = settings;
  s.mode = RunMode::general;
  return Runner(nlp, p0, s).execute();
}

RunResult run_neighbor_affine(const PartitionedNlp& nlp, const PrimalDualPoint& p0,
                              const RunSettings& settings) {
  RunSettings s = settings;
  s.mode = RunMode::neighbor_affine;
  return Runner(nlp, p0, s).execute();
}

RunResult run(const PartitionedNlp& nlp, const PrimalDualPoint& p0, const RunSettings& settings) {
  return Runner(nlp, p0, settings).execute();
}

PrimalDualPoint phi_map(const PartitionedNlp& nlp, const PrimalDualPoint& p,
                        const SolverSettings& solver) {
  RunSettings s;
  s.mode = RunMode::general;
  s.max_iterations = 1;
  s.solver = solver;
  RunResult r = Runner(nlp, p, s).execute();
  if (r.status == RunStatus::aborted)
    throw Error(ErrorKind::oracle_unavailable,
                "local solve failed while evaluating Phi: " + r.abort->reason, r.abort->agent);
  return r.trace.records.back().point;
}

}  // namespace sbdp
