#include "sbdp/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbdp/analysis.hpp"
#include "sbdp/bench.hpp"
#include "sbdp/config.hpp"
#include "sbdp/coordinator.hpp"
#include "sbdp/ocp.hpp"
#include "sbdp/report.hpp"

namespace sbdp {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kKnownKeys = {
    "problem.id",           "problem.definition",     "problem.initializer",
    "problem.overrides.*",  "run.mode",               "run.eps",
    "run.norm",             "run.max_iterations",     "run.alpha",
    "run.parallelism",      "run.divergence_threshold", "run.reference",
    "run.start",            "solver.kkt_tolerance",   "solver.max_iterations",
    "solver.hessian",       "solver.penalty_growth",  "analysis.at",
    "analysis.sample_pairs", "analysis.lipschitz",    "sweep.N",
    "sweep.t_min",          "sweep.t_max",            "sweep.count",
    "sweep.integrator",     "output.dir",             "seed"};

struct Context {
  std::string command;
  Config cfg;
  fs::path out_dir;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::config_error, "cannot write " + path.string());
  f << text;
}

fs::path resolve_out_dir(const Config& cfg) {
  if (auto d = cfg.text("output.dir")) return *d;
  if (const char* env = std::getenv("SBDP_OUT_DIR"); env && *env) return env;
  return "sbdp_out";
}

BenchmarkInstance load_problem(const Config& cfg) {
  BenchmarkSpec spec;
  std::optional<ProblemDefinition> def;
  if (auto path = cfg.text("problem.definition")) {
    def = load_problem_definition(*path);
    spec = def->spec;
  }
  if (auto id = cfg.text("problem.id")) spec.id = *id;
  if (spec.id.empty())
    throw Error(ErrorKind::config_error, "no problem given: pass --bench <id> or --problem <file>");
  for (const auto& [k, v] : cfg.section("problem.overrides")) spec.overrides[k] = v;
  if (auto init = cfg.text("problem.initializer")) spec.initializer = *init;
  BenchmarkInstance inst = instantiate(spec);
  if (def) check_problem_definition(*def, inst.nlp);
  return inst;
}

RunMode parse_mode(const std::string& s) {
  if (s == "general") return RunMode::general;
  if (s == "neighbor-affine" || s == "affine") return RunMode::neighbor_affine;
  throw Error(ErrorKind::config_error, "mode must be 'general' or 'neighbor-affine'", -1, "run.mode");
}

SolverSettings solver_settings(const Config& cfg) {
  SolverSettings s;
  if (auto v = cfg.number("solver.kkt_tolerance")) s.kkt_tolerance = *v;
  if (auto v = cfg.integer("solver.max_iterations")) s.max_sqp_iterations = *v;
  if (auto v = cfg.number("solver.penalty_growth")) s.penalty_growth = *v;
  if (auto h = cfg.text("solver.hessian")) {
    if (*h == "exact") s.hessian_mode = HessianMode::exact;
    else if (*h == "quasi-newton" || *h == "bfgs") s.hessian_mode = HessianMode::quasi_newton;
    else throw Error(ErrorKind::config_error, "solver.hessian must be exact or quasi-newton");
  }
  s.validate();
  return s;
}

RunSettings run_settings(const Config& cfg, const BenchmarkInstance& inst) {
  RunSettings s;
  s.mode = parse_mode(cfg.text("run.mode").value_or(inst.preferred_mode));
  if (auto v = cfg.number("run.eps")) s.eps = *v;
  if (auto v = cfg.integer("run.max_iterations")) s.max_iterations = *v;
  if (auto v = cfg.number("run.alpha")) s.alpha = *v;
  if (auto v = cfg.integer("run.parallelism")) s.parallelism = *v;
  if (auto v = cfg.number("run.divergence_threshold")) s.divergence_threshold = *v;
  if (auto n = cfg.text("run.norm")) {
    if (*n == "inf" || *n == "infinity") s.norm = NormKind::infinity;
    else if (*n == "2" || *n == "euclidean") s.norm = NormKind::euclidean;
    else throw Error(ErrorKind::config_error, "run.norm must be infinity or euclidean");
  }
  s.solver = solver_settings(cfg);
  s.validate();
  return s;
}

PrimalDualPoint start_point(const Config& cfg, const BenchmarkInstance& inst) {
  const std::string kind = cfg.text("run.start").value_or("benchmark");
  if (kind == "benchmark") return inst.initial;
  if (kind == "zeros") return PrimalDualPoint::zeros(inst.nlp);
  if (kind == "central-solve") return central_solve(inst.nlp, inst.initial);
  auto v = cfg.numbers("run.start");
  Vec p = Eigen::Map<const Vec>(v->data(), static_cast<Eigen::Index>(v->size()));
  if (p.size() != inst.nlp.stacked_size())
    throw Error(ErrorKind::config_error,
                "run.start has " + std::to_string(p.size()) + " entries, expected " +
                    std::to_string(inst.nlp.stacked_size()));
  return PrimalDualPoint::from_stacked(inst.nlp, p);
}

std::optional<PrimalDualPoint> reference_point(const Context& ctx, const BenchmarkInstance& inst) {
  const std::string ref = ctx.cfg.text("run.reference").value_or("central-solve");
  if (ref == "none") return std::nullopt;
  if (ref != "central-solve")
    throw Error(ErrorKind::config_error, "run.reference must be central-solve or none");
  try {
    return central_solve(inst.nlp, inst.initial);
  } catch (const Error& e) {
    *ctx.err << "warning: no reference point (" << e.what() << ")\n";
    return std::nullopt;
  }
}

int exit_code(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return 0;
    case RunStatus::diverged:
    case RunStatus::max_iterations: return 2;
    case RunStatus::aborted: return 3;
  }
  return 1;
}

int cmd_solve(Context& ctx) {
  BenchmarkInstance inst = load_problem(ctx.cfg);
  RunSettings settings = run_settings(ctx.cfg, inst);
  PrimalDualPoint p0 = start_point(ctx.cfg, inst);
  settings.reference = reference_point(ctx, inst);
  RunResult r = run(inst.nlp, p0, settings);

  std::ofstream csv(ctx.out_dir / "trace.csv");
  write_trace_csv(csv, r.trace);
  write_text(ctx.out_dir / "summary.json", run_summary_json(r, inst.id, settings));
  *ctx.out << inst.id << ": " << to_string(r.status) << " after " << r.iterations
           << " iterations";
  if (!r.trace.records.empty())
    *ctx.out << ", step norm " << format_number(r.trace.records.back().step_norm);
  if (r.abort)
    *ctx.out << " (agent " << r.abort->agent << ", iteration " << r.abort->iteration << ": "
             << r.abort->reason << ")";
  *ctx.out << '\n';
  return exit_code(r.status);
}

PrimalDualPoint analysis_point(const Context& ctx, const BenchmarkInstance& inst) {
  const std::string at = ctx.cfg.text("analysis.at").value_or("central-solve");
  if (at == "central-solve") return central_solve(inst.nlp, inst.initial);
  if (at.rfind("minimum-", 0) == 0) {
    const int n = std::atoi(at.c_str() + 8);
    if (n < 1 || n > static_cast<int>(inst.reference_minima.size()))
      throw Error(ErrorKind::config_error, "benchmark " + inst.id + " has no " + at);
    PrimalDualPoint guess = PrimalDualPoint::zeros(inst.nlp);
    const Vec& x = inst.reference_minima[n - 1];
    for (int i = 0, k = 0; i < inst.nlp.agent_count(); k += inst.nlp.agents[i].n, ++i)
      guess.agents[i].x = x.segment(k, inst.nlp.agents[i].n);
    return central_solve(inst.nlp, guess);
  }
  std::ifstream in(at);
  if (!in)
    throw Error(ErrorKind::config_error,
                "--at must be central-solve, minimum-<n> or a readable JSON file: " + at);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config_error, at + ": " + e.what());
  }
  if (j.is_object() && j.contains("final_point")) j = j["final_point"];
  if (j.is_object() && j.contains("point")) j = j["point"];
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::config_error, at + ": expected an array of numbers");
  }
  if (static_cast<int>(v.size()) != inst.nlp.stacked_size())
    throw Error(ErrorKind::config_error, at + ": point has wrong length");
  return PrimalDualPoint::from_stacked(inst.nlp, Eigen::Map<const Vec>(v.data(), v.size()));
}

CertifyOptions certify_options(const Config& cfg) {
  CertifyOptions o;
  if (auto v = cfg.integer("seed")) o.seed = static_cast<std::uint64_t>(*v);
  if (auto v = cfg.integer("analysis.sample_pairs")) o.sample_pairs = *v;
  if (auto v = cfg.flag("analysis.lipschitz")) o.estimate_lipschitz = *v;
  if (auto v = cfg.integer("run.parallelism")) o.parallelism = std::max(1, *v);
  return o;
}

int cmd_analyze(Context& ctx) {
  BenchmarkInstance inst = load_problem(ctx.cfg);
  PrimalDualPoint p = analysis_point(ctx, inst);
  ConvergenceEstimate e = certify(inst.nlp, p, certify_options(ctx.cfg));
  const std::string cert = certificate_json(e, inst.id);
  write_text(ctx.out_dir / "certificate.json", cert);
  json summary = json::parse(cert);
  summary["command"] = "analyze";
  summary["status"] = "ok";
  write_text(ctx.out_dir / "summary.json", summary.dump(2));
  *ctx.out << cert << '\n';
  return 0;
}

int cmd_sweep(Context& ctx) {
  BenchmarkInstance inst = load_problem(ctx.cfg);
  if (!inst.ocp)
    throw Error(ErrorKind::config_error, "sweep-horizon needs an OCP benchmark, not " + inst.id);
  const int N = ctx.cfg.integer("sweep.N").value_or(inst.N);
  const double lo = ctx.cfg.number("sweep.t_min").value_or(0.1);
  const double hi = ctx.cfg.number("sweep.t_max").value_or(4.0);
  const int count = ctx.cfg.integer("sweep.count").value_or(40);
  const Integrator m = ctx.cfg.text("sweep.integrator")
                           ? parse_integrator(*ctx.cfg.text("sweep.integrator"))
                           : inst.integrator;
  const int par = std::max(1, ctx.cfg.integer("run.parallelism").value_or(1));
  SweepResult sweep = horizon_sweep(*inst.ocp, N, log_grid(lo, hi, count), m, {}, par);

  std::ofstream csv(ctx.out_dir / "sweep.csv");
  write_sweep_csv(csv, sweep);
  write_sweep_csv(*ctx.out, sweep);
  json s;
  s["command"] = "sweep-horizon";
  s["status"] = "ok";
  s["problem"] = inst.id;
  s["N"] = N;
  s["integrator"] = to_string(m);
  s["empirical_tmax"] = sweep.empirical_tmax ? json(*sweep.empirical_tmax) : json(nullptr);
  if (inst.id == "integrator-ocp") {
    auto tm = closed_form_tmax_integrator(std::stod(inst.parameters.at("q")),
                                          std::stod(inst.parameters.at("r")),
                                          std::stod(inst.parameters.at("w")));
    s["closed_form_tmax"] = tm ? json(*tm) : json(nullptr);
  }
  write_text(ctx.out_dir / "summary.json", s.dump(2));
  return 0;
}

int cmd_bench(Context& ctx) {
  std::vector<std::string> ids;
  if (auto id = ctx.cfg.text("problem.id")) ids = {*id};
  else if (ctx.cfg.text("problem.definition")) ids = {""};
  else ids = benchmark_ids();

  std::ofstream table(ctx.out_dir / "bench_summary.csv");
  table << "id,mode,status,iterations,final_error,jacobian_norm,spectral_radius,order,"
           "predicted_rate,observed_rate,note\n";
  json rows = json::array();
  for (const std::string& id : ids) {
    Config cfg = ctx.cfg;
    if (!id.empty()) cfg.set("problem.id", id);
    BenchmarkInstance inst = load_problem(cfg);
    RunSettings settings = run_settings(cfg, inst);
    std::string note;
    PrimalDualPoint ref = central_solve(inst.nlp, inst.initial);
    settings.reference = ref;
    std::optional<ConvergenceEstimate> est;
    try {
      CertifyOptions o = certify_options(cfg);
      est = certify(inst.nlp, ref, o);
      write_text(ctx.out_dir / ("certificate_" + inst.id + ".json"), certificate_json(*est, inst.id));
    } catch (const Error& e) {
      note = e.what();
    }
    RunResult r = run(inst.nlp, inst.initial, settings);
    std::ofstream csv(ctx.out_dir / ("trace_" + inst.id + ".csv"));
    write_trace_csv(csv, r.trace);
    const double observed = tail_rate(r.trace, ref);
    const auto& last = r.trace.records.back();
    const double err = last.error ? *last.error : std::nan("");

    table << inst.id << ',' << to_string(settings.mode) << ',' << to_string(r.status) << ','
          << r.iterations << ',' << format_number(err) << ','
          << (est ? format_number(est->jacobian_norm) : "") << ','
          << (est ? format_number(est->spectral_radius) : "") << ','
          << (est ? to_string(est->order) : "") << ','
          << (est ? format_number(est->rate) : "") << ',' << format_number(observed) << ','
          << '"' << note << '"' << '\n';
    *ctx.out << inst.id << ": " << to_string(r.status) << " in " << r.iterations
             << " iterations, error " << format_number(err);
    if (est) *ctx.out << ", rho(J) " << format_number(est->spectral_radius);
    *ctx.out << '\n';
    rows.push_back({{"id", inst.id},
                    {"status", to_string(r.status)},
                    {"iterations", r.iterations},
                    {"observed_rate", std::isnan(observed) ? json(nullptr) : json(observed)}});
  }
  json s;
  s["command"] = "bench";
  s["status"] = "ok";
  s["benchmarks"] = rows;
  write_text(ctx.out_dir / "summary.json", s.dump(2));
  return 0;
}

void write_error_summary(const fs::path& dir, const std::string& command, const std::string& kind,
                         const std::string& message) {
  try {
    fs::create_directories(dir);
    json s;
    s["command"] = command;
    s["status"] = "error";
    s["error_kind"] = kind;
    s["message"] = message;
    write_text(dir / "summary.json", s.dump(2));
  } catch (const std::exception&) {
    // nothing more can be reported
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sensitivity-based distributed programming"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flag_values;
  std::vector<std::pair<CLI::Option*, std::string>> bound;
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<CLI::Option*> config_opts, set_opts;

  auto add = [&](CLI::App* sub, const std::string& flag, const std::string& key,
                 const std::string& help) {
    bound.emplace_back(sub->add_option(flag, flag_values[key], help), key);
  };
  auto common = [&](CLI::App* sub) {
    config_opts.push_back(sub->add_option("--config", config_path, "JSON run-config file"));
    add(sub, "--out", "output.dir", "output directory");
    add(sub, "--seed", "seed", "seed for randomized sampling");
    add(sub, "--mode", "run.mode", "general | neighbor-affine");
    add(sub, "--eps", "run.eps", "stopping tolerance");
    add(sub, "--max-iter", "run.max_iterations", "iteration limit");
    add(sub, "--alpha", "run.alpha", "damping factor in (0, 1]");
    add(sub, "--parallel", "run.parallelism", "worker threads (1 = serial)");
    add(sub, "--bench", "problem.id", "built-in benchmark id");
    add(sub, "--problem", "problem.definition", "problem-definition file");
    add(sub, "--init", "problem.initializer", "benchmark initializer");
    add(sub, "--reference", "run.reference", "central-solve | none");
    set_opts.push_back(sub->add_option("--set", sets, "benchmark parameter override name=value"));
  };

  CLI::App* solve = app.add_subcommand("solve", "run SBDP on a problem");
  CLI::App* analyze = app.add_subcommand("analyze", "certify convergence at a KKT point");
  CLI::App* sweep = app.add_subcommand("sweep-horizon", "Jacobian norm versus horizon length");
  CLI::App* bench = app.add_subcommand("bench", "run built-in benchmarks");
  for (CLI::App* sub : {solve, analyze, sweep, bench}) common(sub);
  add(analyze, "--at", "analysis.at", "central-solve | minimum-<n> | point file");
  add(sweep, "--N", "sweep.N", "intervals");
  add(sweep, "--t-min", "sweep.t_min", "smallest horizon");
  add(sweep, "--t-max", "sweep.t_max", "largest horizon");
  add(sweep, "--count", "sweep.count", "grid points");
  add(sweep, "--integrator", "sweep.integrator", "euler | heun | rk4");

  std::string command = "sbdp";
  Config cfg;
  fs::path out_dir = resolve_out_dir(cfg);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    for (CLI::App* sub : {solve, analyze, sweep, bench})
      if (sub->parsed()) command = sub->get_name();

    // Honor --out even when the config file turns out to be invalid.
    for (const auto& [opt, key] : bound)
      if (key == "output.dir" && opt->count() > 0) out_dir = flag_values[key];
    if (!config_path.empty()) cfg = Config::load(config_path);
    for (const auto& [opt, key] : bound)
      if (opt->count() > 0) cfg.set(key, flag_values[key]);
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0)
        throw Error(ErrorKind::config_error, "--set expects name=value, got " + s);
      cfg.set("problem.overrides." + s.substr(0, eq), s.substr(eq + 1));
    }
    cfg.check_known(kKnownKeys);
    out_dir = resolve_out_dir(cfg);
    fs::create_directories(out_dir);

    Context ctx{command, cfg, out_dir, &out, &err};
    if (command == "solve") return cmd_solve(ctx);
    if (command == "analyze") return cmd_analyze(ctx);
    if (command == "sweep-horizon") return cmd_sweep(ctx);
    return cmd_bench(ctx);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    write_error_summary(out_dir, command, "config_error", e.what());
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    write_error_summary(out_dir, command, to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    write_error_summary(out_dir, command, "error", e.what());
    return 1;
  }
}

}  // namespace sbdp
