#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "sbdp/bench.hpp"
#include "sbdp/derivatives.hpp"
#include "sbdp/local_solver.hpp"
#include "sbdp/model.hpp"
#include "sbdp/sqp.hpp"

using namespace sbdp;
using namespace sbdp::test;

namespace {

// min (x0 - 2)^2 + (x1 - 1)^2  s.t.  x0^2 - x1 <= 0,  x0 + x1 <= 2.
// Solution (1, 1) with mu = (2/3, 2/3).
class Textbook final : public NlpEvaluator {
 public:
  int variables() const override { return 2; }
  int equalities() const override { return 0; }
  int inequalities() const override { return 2; }
  double objective(const Vec& x) const override {
    return std::pow(x[0] - 2, 2) + std::pow(x[1] - 1, 2);
  }
  Vec gradient(const Vec& x) const override { return Vec{{2 * (x[0] - 2), 2 * (x[1] - 1)}}; }
  Vec equality(const Vec&) const override { return Vec(0); }
  Mat equality_jacobian(const Vec&) const override { return Mat(0, 2); }
  Vec inequality(const Vec& x) const override {
    return Vec{{x[0] * x[0] - x[1], x[0] + x[1] - 2}};
  }
  Mat inequality_jacobian(const Vec& x) const override {
    return Mat{{2 * x[0], -1.0}, {1.0, 1.0}};
  }
  Mat lagrangian_hessian(const Vec&, const Vec&, const Vec& mu) const override {
    return Mat{{2 + 2 * mu[0], 0.0}, {0.0, 2.0}};
  }
};

// min x0 + x1  s.t.  x0^2 + x1^2 = 2.  Solution (-1, -1), lambda = 1/2.
class Circle final : public NlpEvaluator {
 public:
  int variables() const override { return 2; }
  int equalities() const override { return 1; }
  int inequalities() const override { return 0; }
  double objective(const Vec& x) const override { return x.sum(); }
  Vec gradient(const Vec&) const override { return Vec::Ones(2); }
  Vec equality(const Vec& x) const override { return Vec::Constant(1, x.squaredNorm() - 2); }
  Mat equality_jacobian(const Vec& x) const override { return 2 * x.transpose(); }
  Vec inequality(const Vec&) const override { return Vec(0); }
  Mat inequality_jacobian(const Vec&) const override { return Mat(0, 2); }
  Mat lagrangian_hessian(const Vec&, const Vec& l, const Vec&) const override {
    return 2 * l[0] * Mat::Identity(2, 2);
  }
};

}  // namespace

TEST_CASE("sqp reaches the textbook inequality solution") {
  Textbook nlp;
  SolverSettings s;
  s.kkt_tolerance = 1e-12;
  for (Vec x0 : {Vec{{0.0, 0.0}}, Vec{{3.0, -2.0}}, Vec{{-1.0, 4.0}}}) {
    SqpResult r = solve_sqp(nlp, x0, Vec(0), Vec::Zero(2), s);
    REQUIRE(r.status == SqpStatus::converged);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.mu[0] == doctest::Approx(2.0 / 3).epsilon(1e-9));
    CHECK(r.mu[1] == doctest::Approx(2.0 / 3).epsilon(1e-9));
    CHECK(kkt_residual(nlp, r.x, r.lambda, r.mu) <= 1e-12);
  }
}

TEST_CASE("sqp handles an equality with a concave start region") {
  Circle nlp;
  SolverSettings s;
  s.kkt_tolerance = 1e-12;
  SqpResult r = solve_sqp(nlp, Vec{{-0.5, -2.0}}, Vec::Zero(1), Vec(0), s);
  REQUIRE(r.status == SqpStatus::converged);
  CHECK(r.x[0] == doctest::Approx(-1.0));
  CHECK(r.x[1] == doctest::Approx(-1.0));
  CHECK(r.lambda[0] == doctest::Approx(0.5));
}

TEST_CASE("sqp quasi-Newton mode also converges") {
  Textbook nlp;
  SolverSettings s;
  s.hessian_mode = HessianMode::quasi_newton;
  s.kkt_tolerance = 1e-9;
  SqpResult r = solve_sqp(nlp, Vec{{0.0, 0.0}}, Vec(0), Vec::Zero(2), s);
  REQUIRE(r.status == SqpStatus::converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("solver settings reject invalid values") {
  SolverSettings s;
  s.kkt_tolerance = -1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.max_sqp_iterations = 0;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("finite-difference fallbacks match analytic derivatives") {
  BenchmarkInstance b = instantiate({"constrained-2agent", {}, ""});
  const AgentFunctions& full = b.nlp.agents[0];
  AgentFunctions bare = full;
  bare.objective_gradient = nullptr;
  bare.equality_jacobian = nullptr;
  bare.lagrangian_hessian = nullptr;
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    Blocks blk = {random_vec(rng, 1, 2.0), random_vec(rng, 1, 2.0)};
    Vec lambda = random_vec(rng, 1);
    for (int k = 0; k < 2; ++k) {
      CHECK(inf_norm(objective_gradient(full, blk, k) - objective_gradient(bare, blk, k)) < 1e-7);
      CHECK((equality_jacobian(full, blk, k) - equality_jacobian(bare, blk, k)).norm() < 1e-8);
      for (int l = 0; l < 2; ++l) {
        Mat a = lagrangian_hessian(full, blk, lambda, Vec(0), k, l);
        Mat f = lagrangian_hessian(bare, blk, lambda, Vec(0), k, l);
        CHECK((a - f).norm() < 1e-5 * (1 + a.norm()));
      }
    }
  }
}

TEST_CASE("fd helpers differentiate a known vector function") {
  auto f = [](const Vec& x) { return Vec{{std::sin(x[0]) * x[1], x[0] * x[0] + std::exp(x[1])}}; };
  Vec x{{0.3, -0.7}};
  Mat J = fd_jacobian(f, x, 2);
  Mat exact{{std::cos(0.3) * -0.7, std::sin(0.3)}, {0.6, std::exp(-0.7)}};
  CHECK((J - exact).norm() < 1e-9);
  Vec g = fd_gradient([](const Vec& v) { return v.squaredNorm(); }, x);
  CHECK(inf_norm(g - 2 * x) < 1e-9);
  CHECK(fd_step(0.0) == 1e-6);
  CHECK(fd_step(1e3) == doctest::Approx(1e-4));
}

TEST_CASE("central solve of the constrained example matches the closed form") {
  BenchmarkInstance b = instantiate({"constrained-2agent", {}, ""});
  PrimalDualPoint p = central_solve(b.nlp, b.initial);
  // Exact KKT point: x = (4/7, -6/7), lambda = 120/343.
  const double x1 = p.agents[0].x[0], x2 = p.agents[1].x[0], l = p.agents[0].lambda[0];
  CHECK(2 * x1 - 2 - x2 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(4 * x1 * x1 * x1 - 4 * x1 + 2 * x1 * x2 * x2 + 2 * l == doctest::Approx(0.0));
  CHECK(4 * x2 * x2 * x2 - 4 * x2 + 2 * x1 * x1 * x2 - l == doctest::Approx(0.0));
  CHECK(x1 == doctest::Approx(4.0 / 7).epsilon(1e-10));
  CHECK(x2 == doctest::Approx(-6.0 / 7).epsilon(1e-10));
  CHECK(l == doctest::Approx(120.0 / 343).epsilon(1e-10));
}

TEST_CASE("central solve failure carries the residual history") {
  BenchmarkInstance b = instantiate({"pendulum-chain", {}, "interpolation"});
  SolverSettings s;
  s.max_sqp_iterations = 1;
  s.kkt_tolerance = 1e-14;
  try {
    solve_central(b.nlp, b.initial, s);
    FAIL("expected not_converged");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_converged);
    CHECK(std::string(e.what()).find("residual history") != std::string::npos);
  }
}
