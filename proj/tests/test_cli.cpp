#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sbdp/bench.hpp"
#include "sbdp/cli.hpp"
#include "sbdp/config.hpp"
#include "sbdp/report.hpp"

using namespace sbdp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("sbdp_test_" + name);
  fs::remove_all(p);
  return p;
}

struct Cli {
  int code = 0;
  std::string out, err;
};

Cli cli(std::vector<std::string> args) {
  std::ostringstream o, e;
  Cli r;
  r.code = run_cli(args, o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

std::string read_text(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("benchmark registry rejects unknown ids, parameters and initializers") {
  try {
    instantiate({"no-such", {}, ""});
    FAIL("expected unknown_benchmark");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unknown_benchmark);
    CHECK(std::string(e.what()).find("smart-grid") != std::string::npos);
  }
  try {
    instantiate({"smart-grid", {{"inertia", "2"}}, ""});
    FAIL("expected config_error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config_error);
    CHECK(e.field() == "inertia");
  }
  CHECK_THROWS_AS(instantiate({"constrained-2agent", {}, "elsewhere"}), Error);
  CHECK_THROWS_AS(instantiate({"smart-grid", {{"N", "2.5"}}, ""}), Error);
  CHECK(benchmark_ids().size() == 5);
  for (const auto& id : benchmark_ids()) CHECK_NOTHROW(benchmark_parameters(id));
}

TEST_CASE("benchmark parameters shape the instance") {
  BenchmarkInstance g = instantiate({"smart-grid", {{"agents", "8"}, {"hops", "2"}}, ""});
  CHECK(g.nlp.agent_count() == 8);
  CHECK(g.nlp.graph.neighbors(0).size() == 4);
  // Loads (odd agents) have no inputs.
  CHECK(g.nlp.agents[1].n == 21 * 2);
  CHECK(g.nlp.agents[0].n == 21 * 2 + 20);
  BenchmarkInstance p = instantiate({"pendulum-chain", {{"scale", "full"}}, "interpolation"});
  CHECK(p.nlp.agent_count() == 10);
  CHECK(p.N == 80);
  int n = 0, ng = 0, nh = 0;
  for (const auto& a : p.nlp.agents) {
    n += a.n;
    ng += a.n_eq;
    nh += a.n_ineq;
  }
  CHECK(n == 4040);
  CHECK(ng == 3280);
  CHECK(nh == 4840);  // input bounds on the N inputs only
}

TEST_CASE("config flattens nested JSON to dotted keys") {
  Config c = Config::parse(R"({"run": {"eps": 1e-6, "mode": "general"}, "sweep": {"t_min": 0.2},
                                "problem": {"overrides": {"c": 0.5}}, "list": [1, 2]})");
  CHECK(*c.number("run.eps") == 1e-6);
  CHECK(*c.text("run.mode") == "general");
  CHECK(c.section("problem.overrides").at("c") == "0.5");
  CHECK((*c.numbers("list") == std::vector<double>{1, 2}));
  CHECK_FALSE(c.text("run.alpha").has_value());
  CHECK_THROWS_AS(c.integer("run.eps"), Error);
  CHECK_THROWS_AS(c.number("run.mode"), Error);
  CHECK_NOTHROW(c.check_known({"run.eps", "run.mode", "sweep.t_min", "problem.overrides.*",
                               "list"}));
  try {
    c.check_known({"run.eps"});
    FAIL("expected unknown key");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config_error);
  }
  CHECK_THROWS_AS(Config::parse("[1, 2]"), Error);
  CHECK_THROWS_AS(Config::parse("{not json"), Error);
}

TEST_CASE("problem definitions are checked against the benchmark") {
  ProblemDefinition d = parse_problem_definition(
      R"({"benchmark": "constrained-2agent", "agents": 2, "neighbors": [[1], [0]],
          "dimensions": [{"n": 1, "n_eq": 1}, {"n": 1}]})");
  BenchmarkInstance b = instantiate(d.spec);
  CHECK_NOTHROW(check_problem_definition(d, b.nlp));
  d.dimensions[1][1] = 1;
  CHECK_THROWS_AS(check_problem_definition(d, b.nlp), Error);
  CHECK_THROWS_AS(parse_problem_definition(R"({"agents": 2})"), Error);
  CHECK_THROWS_AS(parse_problem_definition(R"({"benchmark": "x", "colour": 1})"), Error);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3, -2.5e-300, 12345678.9}) CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(std::nan("")).empty());
}

TEST_CASE("cli solve writes a trace and a summary") {
  fs::path dir = scratch("solve");
  Cli r = cli({"solve", "--bench", "constrained-2agent", "--mode", "neighbor-affine", "--out",
               dir.string()});
  CHECK(r.code == 0);
  json s = read_json(dir / "summary.json");
  CHECK(s["status"] == "converged");
  std::string trace = read_text(dir / "trace.csv");
  CHECK(trace.rfind("q,step_norm,kkt_residual,error,rate,floats_sent\n", 0) == 0);
}

TEST_CASE("cli exit codes") {
  fs::path dir = scratch("codes");
  CHECK(cli({"solve", "--bench", "constrained-2agent", "--max-iter", "2", "--out", dir.string()})
            .code == 2);
  CHECK(read_json(dir / "summary.json")["status"] == "max_iterations");
  CHECK(cli({"solve", "--bench", "unconstrained-2agent", "--set", "partition=bad", "--out",
             dir.string()})
            .code == 3);
  Cli bad = cli({"solve", "--bench", "nope", "--out", dir.string()});
  CHECK(bad.code == 1);
  json s = read_json(dir / "summary.json");
  CHECK(s["status"] == "error");
  CHECK(s["error_kind"] == "unknown_benchmark");
  CHECK(cli({"solve", "--bench", "smart-grid", "--set", "bogus=1", "--out", dir.string()}).code ==
        1);
  CHECK(cli({"solve", "--bench", "smart-grid", "--alpha", "1.5", "--out", dir.string()}).code ==
        1);
  // Unparseable command lines fall back to the environment's output dir.
  setenv("SBDP_OUT_DIR", dir.string().c_str(), 1);
  CHECK(cli({"frobnicate"}).code == 1);
  unsetenv("SBDP_OUT_DIR");
  CHECK(read_json(dir / "summary.json")["error_kind"] == "config_error");
}

TEST_CASE("cli config file and flag precedence") {
  fs::path dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "run.json");
    f << R"({"problem": {"id": "constrained-2agent"}, "run": {"max_iterations": 2}})";
  }
  CHECK(cli({"solve", "--config", (dir / "run.json").string(), "--out", dir.string()}).code == 2);
  CHECK(cli({"solve", "--config", (dir / "run.json").string(), "--max-iter", "500", "--out",
             dir.string()})
            .code == 0);
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"run": {"iterations": 3}})";
  }
  CHECK(cli({"solve", "--config", (dir / "bad.json").string(), "--out", dir.string()}).code == 1);
  CHECK(read_json(dir / "summary.json")["message"].get<std::string>().find("run.iterations") !=
        std::string::npos);
}

TEST_CASE("cli analyze writes a certificate") {
  fs::path dir = scratch("analyze");
  CHECK(cli({"analyze", "--bench", "unconstrained-2agent", "--init", "minimum-3", "--out",
             dir.string()})
            .code == 0);
  json c = read_json(dir / "certificate.json");
  CHECK(c["spectral_radius"].get<double>() == doctest::Approx(0.0826).epsilon(1e-3));
  CHECK(c["radius_note"] == "conservative estimate");
}

TEST_CASE("cli sweep reports the closed form for the integrator") {
  fs::path dir = scratch("sweep");
  CHECK(cli({"sweep-horizon", "--bench", "integrator-ocp", "--t-min", "0.5", "--t-max", "1.5",
             "--count", "3", "--out", dir.string()})
            .code == 0);
  json s = read_json(dir / "summary.json");
  CHECK(s["closed_form_tmax"].get<double>() == doctest::Approx(std::sqrt(4.0 / 3)));
  std::string csv = read_text(dir / "sweep.csv");
  CHECK(csv.rfind("T,norm,spectral_radius,converges,order,available,note\n", 0) == 0);
}

TEST_CASE("cli bench runs a single benchmark") {
  fs::path dir = scratch("bench");
  CHECK(cli({"bench", "--bench", "unconstrained-2agent", "--init", "minimum-2", "--out",
             dir.string()})
            .code == 0);
  CHECK(fs::exists(dir / "trace_unconstrained-2agent.csv"));
  CHECK(fs::exists(dir / "certificate_unconstrained-2agent.json"));
  CHECK(read_text(dir / "bench_summary.csv").find("unconstrained-2agent,neighbor-affine,converged") !=
        std::string::npos);
}

TEST_CASE("repeated cli runs produce identical traces across thread counts") {
  fs::path a = scratch("det_a"), b = scratch("det_b");
  cli({"solve", "--bench", "smart-grid", "--max-iter", "5", "--parallel", "1", "--out",
       a.string()});
  cli({"solve", "--bench", "smart-grid", "--max-iter", "5", "--parallel", "6", "--out",
       b.string()});
  CHECK(read_text(a / "trace.csv") == read_text(b / "trace.csv"));
}
