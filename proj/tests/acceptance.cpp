// Acceptance checks, one PASS/FAIL line per criterion.
//   sbdp_acceptance            runs all criteria
//   sbdp_acceptance 4 7        runs the listed criteria
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sbdp/analysis.hpp"
#include "sbdp/bench.hpp"
#include "sbdp/coordinator.hpp"
#include "sbdp/ocp.hpp"
#include "sbdp/report.hpp"

using namespace sbdp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "[x] ") << what;
  }
};

BenchmarkInstance make(const std::string& id, std::map<std::string, std::string> overrides = {},
                       const std::string& init = "") {
  return instantiate({id, std::move(overrides), init});
}

RunSettings settings_for(const BenchmarkInstance& b) {
  RunSettings s;
  s.mode = b.preferred_mode == "neighbor-affine" ? RunMode::neighbor_affine : RunMode::general;
  s.eps = 1e-8;
  return s;
}

double inf_diff(const PrimalDualPoint& a, const PrimalDualPoint& b) {
  return (a.stacked() - b.stacked()).lpNorm<Eigen::Infinity>();
}

// Benchmark KKT points shared by the oracle and fixed-point criteria.
struct KktCase {
  std::string name;
  BenchmarkInstance bench;
  PrimalDualPoint point;
};

std::vector<KktCase> kkt_cases() {
  std::vector<KktCase> out;
  auto add = [&](const std::string& name, BenchmarkInstance b) {
    PrimalDualPoint p = central_solve(b.nlp, b.initial);
    out.push_back({name, std::move(b), std::move(p)});
  };
  add("constrained-2agent", make("constrained-2agent"));
  for (int k = 1; k <= 3; ++k)
    add("unconstrained-2agent/minimum-" + std::to_string(k),
        make("unconstrained-2agent", {}, "minimum-" + std::to_string(k)));
  add("integrator-ocp", make("integrator-ocp"));
  add("pendulum-chain", make("pendulum-chain"));
  add("smart-grid", make("smart-grid"));
  return out;
}

// Constrained two-agent example.
void criterion_1(Outcome& o) {
  auto t0 = Clock::now();
  BenchmarkInstance b = make("constrained-2agent");
  RunSettings s = settings_for(b);
  o.require(s.mode == RunMode::neighbor_affine, "run in neighbor-affine mode");
  RunResult r = run(b.nlp, b.initial, s);
  const PrimalDualPoint& p = r.final_point;
  const double x1 = p.agents[0].x[0], x2 = p.agents[1].x[0], l1 = p.agents[0].lambda[0];
  o.require(r.status == RunStatus::converged, std::string("status ") + to_string(r.status));
  o.require(std::abs(x1 - 0.57) <= 1e-2 && std::abs(x2 + 0.86) <= 1e-2,
            "x* = [" + fmt("%.4f", x1) + ", " + fmt("%.4f", x2) + "] vs [0.57, -0.86]");
  o.require(std::abs(l1 - 0.35) <= 1e-2, "lambda1* = " + fmt("%.4f", l1) + " vs 0.35");
  ConvergenceEstimate c = certify(b.nlp, p);
  o.require(std::abs(c.spectral_radius - 0.66) <= 0.02,
            "rho(J) = " + fmt("%.4f", c.spectral_radius) + " vs 0.66 +- 0.02 (||J||_2 = " +
                fmt("%.4f", c.jacobian_norm) + ")");
  o.require(std::abs(c.lipschitz_estimate - 2.23) <= 0.3,
            "L = " + fmt("%.3f", c.lipschitz_estimate) + " vs 2.23 +- 0.3");
  o.require(std::abs(c.radius - 0.3) <= 0.1, "r = " + fmt("%.3f", c.radius) + " vs 0.3 +- 0.1");
  const double t = seconds_since(t0);
  o.require(t < 1.0, "runtime " + fmt("%.2f", t) + " s < 1 s");
}

// Unconstrained example from the three initializers.
void criterion_2(Outcome& o) {
  auto t0 = Clock::now();
  const double expected[] = {0.0, 0.45, 0.08};
  for (int k = 0; k < 3; ++k) {
    const std::string tag = "min" + std::to_string(k + 1);
    BenchmarkInstance b = make("unconstrained-2agent", {}, "minimum-" + std::to_string(k + 1));
    RunResult r = run(b.nlp, b.initial, settings_for(b));
    const double err = (r.final_point.primal() - b.reference_minima[k]).lpNorm<Eigen::Infinity>();
    o.require(r.status == RunStatus::converged && err <= 1e-6,
              tag + " status " + to_string(r.status) + " error " + fmt("%.1e", err));
    PrimalDualPoint ref = PrimalDualPoint::zeros(b.nlp);
    ref.agents[0].x[0] = b.reference_minima[k][0];
    ref.agents[1].x[0] = b.reference_minima[k][1];
    ConvergenceEstimate c = certify(b.nlp, ref);
    o.require(std::abs(c.spectral_radius - expected[k]) <= 0.02,
              tag + " rho(J) = " + fmt("%.4f", c.spectral_radius) + " vs " +
                  fmt("%.2f", expected[k]));
    std::vector<double> rates = observed_rates(r.trace, ref);
    std::vector<double> tail;
    for (size_t q = 0; q < rates.size(); ++q) {
      const double e = (r.trace.records[q].point.primal() - ref.primal()).norm();
      if (e > 1e-12) tail.push_back(rates[q]);
    }
    if (k == 0) {
      bool shrinking = tail.size() >= 2;
      for (size_t q = 1; q < tail.size(); ++q) shrinking = shrinking && tail[q] < tail[q - 1];
      o.require(shrinking && tail.back() < 0.05,
                tag + " C^q -> 0 (last " + fmt("%.1e", tail.empty() ? NAN : tail.back()) + ")");
    } else {
      const double rate = tail_rate(r.trace, ref, 5, 1e-9);
      o.require(std::abs(rate - c.spectral_radius) <= 0.05,
                tag + " tail C^q = " + fmt("%.4f", rate));
    }
  }
  const double t = seconds_since(t0);
  o.require(t < 1.0, "runtime " + fmt("%.2f", t) + " s < 1 s");
}

// Partition violating the local convexity assumption.
void criterion_3(Outcome& o) {
  BenchmarkInstance b = make("unconstrained-2agent", {{"partition", "bad"}}, "minimum-1");
  RunSettings s = settings_for(b);
  s.max_iterations = 200;
  RunResult r = run(b.nlp, b.initial, s);
  o.require(r.status == RunStatus::diverged || r.status == RunStatus::aborted,
            std::string("status ") + to_string(r.status) + " after " +
                std::to_string(r.iterations) + " iterations from [0.25, 0.25]" +
                (r.abort ? " (" + r.abort->reason.substr(0, 80) + ")" : ""));
}

// Integrator OCP horizon sweep against the closed-form bound.
void criterion_4(Outcome& o) {
  const std::vector<double> grid = log_grid(0.1, 4.0, 40);
  {
    BenchmarkInstance b = make("integrator-ocp");
    SweepResult sw = horizon_sweep(*b.ocp, 2, grid, Integrator::euler);
    const double closed = *closed_form_tmax_integrator(1, 1, 2);
    const double emp = sw.empirical_tmax.value_or(NAN);
    auto at = std::upper_bound(grid.begin(), grid.end(), closed);
    const double step = at == grid.end() || at == grid.begin() ? 0.0 : *at - *(at - 1);
    o.require(std::abs(emp - closed) <= step,
              "empirical T_max = " + fmt("%.4f", emp) + " vs sqrt(4/3) = " + fmt("%.4f", closed) +
                  " (grid step " + fmt("%.3f", step) + ")");
  }
  {
    BenchmarkInstance b = make("integrator-ocp", {{"w", "0.5"}});
    SweepResult sw = horizon_sweep(*b.ocp, 2, grid, Integrator::euler);
    int ok = 0;
    for (const SweepRow& row : sw.rows) ok += row.available && row.converges;
    o.require(ok == static_cast<int>(grid.size()),
              "2|w| <= q: " + std::to_string(ok) + "/" + std::to_string(grid.size()) +
                  " grid horizons converge");
  }
}

// Pendulum chain at desk scale for three spring constants.
void criterion_5(Outcome& o) {
  auto t0 = Clock::now();
  std::vector<double> rates;
  for (const char* c : {"0.1", "0.25", "0.5"}) {
    BenchmarkInstance b = make("pendulum-chain", {{"c", c}});
    PrimalDualPoint ref = central_solve(b.nlp, b.initial);
    RunSettings s = settings_for(b);
    s.reference = ref;
    RunResult r = run(b.nlp, b.initial, s);
    std::vector<double> err;
    for (const auto& rec : r.trace.records) err.push_back(*rec.primal_error);
    // Monotone decrease from iteration 5 on, down to the accuracy of the reference.
    bool monotone = true;
    for (size_t q = 6; q < err.size(); ++q)
      if (err[q - 1] > 1e-7) monotone = monotone && err[q] < err[q - 1];
    const double rate = tail_rate(r.trace, ref, 1, 1e-6);
    rates.push_back(rate);
    o.require(r.status == RunStatus::converged && monotone,
              std::string("c=") + c + " " + to_string(r.status) + " in " +
                  std::to_string(r.iterations) + " it, monotone after <= 5 transient");
    o.require(rate > 1e-4, std::string("c=") + c + " tail C^q = " + fmt("%.2e", rate) +
                               " (linear, bounded away from 0)");
  }
  o.require(rates[0] < rates[1] && rates[1] < rates[2], "rates strictly increase with c");
  const double t = seconds_since(t0);
  o.require(t < 120.0, "runtime " + fmt("%.1f", t) + " s < 120 s");
}

// Smart grid: pruned norm over the horizon and under agent-count doubling.
void criterion_6(Outcome& o) {
  auto t0 = Clock::now();
  BenchmarkInstance b = make("smart-grid");
  SweepResult sw = horizon_sweep(*b.ocp, b.N, log_grid(0.1, 4.0, 12), b.integrator);
  bool all = true, monotone = true;
  for (size_t k = 0; k < sw.rows.size(); ++k) {
    all = all && sw.rows[k].available;
    if (k) monotone = monotone && sw.rows[k].norm >= sw.rows[k - 1].norm;
  }
  const double lo = sw.rows.front().norm, hi = sw.rows.back().norm;
  o.require(all && monotone && lo < 0.2 * hi,
            "||J|| grows with T on [0.1, 4]: " + fmt("%.4f", lo) + " at T=0.1, " +
                fmt("%.4f", hi) + " at T=4");
  auto norm_for = [](const std::string& agents) {
    BenchmarkInstance g = make("smart-grid", {{"agents", agents}});
    PrimalDualPoint p = central_solve(g.nlp, g.initial);
    return spectral_norm(jacobian(g.nlp, p).J);
  };
  const double n6 = norm_for("6"), n12 = norm_for("12");
  o.require(std::abs(n12 - n6) <= 1e-3, "M=6: " + fmt("%.6f", n6) + ", M=12: " +
                                            fmt("%.6f", n12) + " (|diff| <= 1e-3)");
  const double t = seconds_since(t0);
  o.require(t < 300.0, "runtime " + fmt("%.1f", t) + " s < 300 s");
}

// Analytic Jacobian against finite differences of one SBDP iteration.
void criterion_7(Outcome& o) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (const KktCase& k : kkt_cases()) {
    JacobianAssembly ja = jacobian(k.bench.nlp, k.point, false);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      Vec d(ja.J_full.cols());
      for (int i = 0; i < d.size(); ++i) d[i] = normal(rng);
      d.normalize();
      Vec jd = ja.J_full * d;
      Vec fd = phi_finite_difference(k.bench.nlp, k.point, d);
      worst = std::max(worst, (jd - fd).norm() / std::max(jd.norm(), 1.0));
    }
    o.require(worst <= 1e-4, k.name + " " + fmt("%.1e", worst));
  }
}

// One iteration from a central KKT point stays put.
void criterion_8(Outcome& o) {
  for (const KktCase& k : kkt_cases()) {
    RunSettings s = settings_for(k.bench);
    s.max_iterations = 1;
    s.solver = oracle_solver_settings();
    RunResult r = run(k.bench.nlp, k.point, s);
    const double moved = inf_diff(r.final_point, k.point);
    o.require(moved <= 10 * s.eps, k.name + " " + fmt("%.1e", moved));
  }
}

// Message accounting and mode equivalence.
void criterion_9(Outcome& o) {
  const std::vector<std::pair<std::string, BenchmarkInstance>> cases = {
      {"constrained-2agent", make("constrained-2agent")},
      {"unconstrained-2agent", make("unconstrained-2agent", {}, "minimum-2")},
      {"integrator-ocp", make("integrator-ocp")},
      {"smart-grid", make("smart-grid")},
      {"pendulum-chain", make("pendulum-chain")},
  };
  for (const auto& [name, b] : cases) {
    RunSettings s = settings_for(b);
    s.max_iterations = 40;
    s.mode = RunMode::general;
    RunResult g = run(b.nlp, b.initial, s);
    long gmax = 0;
    for (const auto& rec : g.trace.records) gmax = std::max(gmax, rec.floats);
    o.require(gmax <= general_float_bound(b.nlp),
              name + " general " + std::to_string(gmax) + "/" +
                  std::to_string(general_float_bound(b.nlp)));
    if (!b.nlp.affine_form) continue;
    s.mode = RunMode::neighbor_affine;
    RunResult a = run(b.nlp, b.initial, s);
    long amax = 0;
    for (const auto& rec : a.trace.records) amax = std::max(amax, rec.floats);
    o.require(amax <= affine_float_bound(b.nlp),
              name + " affine " + std::to_string(amax) + "/" +
                  std::to_string(affine_float_bound(b.nlp)));
    double gap = g.trace.records.size() == a.trace.records.size() ? 0.0 : INFINITY;
    for (size_t q = 0; std::isfinite(gap) && q < g.trace.records.size(); ++q)
      gap = std::max(gap, inf_diff(g.trace.records[q].point, a.trace.records[q].point));
    o.require(gap <= 1e-12, name + " modes agree to " + fmt("%.1e", gap));
  }
}

// Byte-identical traces across repeats and thread counts.
void criterion_10(Outcome& o) {
  for (const std::string id : {"constrained-2agent", "smart-grid"}) {
    BenchmarkInstance b = make(id);
    std::vector<std::string> traces;
    for (int par : {1, b.nlp.agent_count(), 1, b.nlp.agent_count()}) {
      RunSettings s = settings_for(b);
      s.parallelism = par;
      s.max_iterations = 30;
      RunResult r = run(b.nlp, b.initial, s);
      std::ostringstream os;
      write_trace_csv(os, r.trace);
      const Vec fin = r.final_point.stacked();
      for (int i = 0; i < fin.size(); ++i) os << format_number(fin[i]) << '\n';
      traces.push_back(os.str());
    }
    bool same = true;
    for (const auto& t : traces) same = same && t == traces[0];
    o.require(same, id + " 4 runs at parallelism 1 and " + std::to_string(b.nlp.agent_count()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void(Outcome&)>> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::stoi(argv[a]));
  if (selected.empty())
    for (int k = 1; k <= 10; ++k) selected.push_back(k);

  bool all = true;
  for (int k : selected) {
    if (k < 1 || k > 10) {
      std::cerr << "no criterion " << k << "\n";
      return 2;
    }
    Outcome o;
    try {
      criteria[k - 1](o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  "
              << o.detail.str() << std::endl;
  }
  return all ? 0 : 1;
}
