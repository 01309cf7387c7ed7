#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "sbdp/bench.hpp"
#include "sbdp/derivatives.hpp"
#include "sbdp/ocp.hpp"

using namespace sbdp;
using namespace sbdp::test;

namespace {

// x' = A x + B u + C x_j, neighbor held constant over the step.
OcpAgent linear_agent(const Mat& A, const Mat& B, const Mat& C) {
  OcpAgent a;
  a.nx = static_cast<int>(A.rows());
  a.nu = static_cast<int>(B.cols());
  a.x0 = Vec::Zero(a.nx);
  a.drift = [A, B](const Vec& x, const Vec& u) { return Vec(A * x + B * u); };
  a.coupling = [C](const Vec&, const Vec& xj) { return Vec(C * xj); };
  a.stage_cost = [](const Vec& x, const Vec& u) { return x.squaredNorm() + u.squaredNorm(); };
  return a;
}

}  // namespace

TEST_CASE("explicit schemes match their Taylor polynomials on linear dynamics") {
  std::mt19937_64 rng(21);
  Mat A = random_mat(rng, 3, 3), B = random_mat(rng, 3, 2), C = random_mat(rng, 3, 3);
  OcpAgent a = linear_agent(A, B, C);
  Vec x = random_vec(rng, 3), u = random_vec(rng, 2), xj = random_vec(rng, 3);
  const double h = 0.1;
  const Vec v = A * x + B * u + C * xj;
  const std::pair<Integrator, int> cases[] = {
      {Integrator::euler, 1}, {Integrator::heun, 2}, {Integrator::rk4, 4}};
  for (auto [m, order] : cases) {
    Vec increment = Vec::Zero(3);
    Mat Ak = Mat::Identity(3, 3);
    double fact = 1;
    for (int k = 1; k <= order; ++k) {
      fact *= k;
      increment += std::pow(h, k) / fact * Ak * v;
      Ak = Ak * A;
    }
    StepIncrement s = step_increment(a, m, h, x, u, {xj});
    INFO(to_string(m));
    CHECK(inf_norm(h * s.f - increment) < 1e-14);
  }
}

TEST_CASE("step Jacobians match finite differences for the pendulum") {
  BenchmarkInstance b = instantiate({"pendulum-chain", {}, "interpolation"});
  const OcpAgent& a = b.ocp->agents[1];
  std::mt19937_64 rng(6);
  Vec x = random_vec(rng, 4), u = random_vec(rng, 1, 5.0);
  std::vector<Vec> nb = {random_vec(rng, 4), random_vec(rng, 4)};
  for (Integrator m : {Integrator::euler, Integrator::heun, Integrator::rk4}) {
    StepIncrement s = step_increment(a, m, 0.05, x, u, nb);
    Mat fx = fd_jacobian([&](const Vec& z) { return step_increment(a, m, 0.05, z, u, nb, false).f; },
                         x, 4);
    Mat fu = fd_jacobian([&](const Vec& z) { return step_increment(a, m, 0.05, x, z, nb, false).f; },
                         u, 4);
    Mat f0 = fd_jacobian(
        [&](const Vec& z) {
          std::vector<Vec> n2 = nb;
          n2[0] = z;
          return step_increment(a, m, 0.05, x, u, n2, false).f;
        },
        nb[0], 4);
    INFO(to_string(m));
    CHECK((s.fx - fx).norm() < 1e-6 * (1 + fx.norm()));
    CHECK((s.fu - fu).norm() < 1e-6 * (1 + fu.norm()));
    CHECK((s.fn[0] - f0).norm() < 1e-6 * (1 + f0.norm()));
  }
}

TEST_CASE("pendulum transcription agrees with an independent RK4 rollout") {
  // Roll out each cart with its own RK4 (neighbors frozen per interval) and
  // check the equality rows of the transcription vanish on that trajectory.
  BenchmarkInstance b = instantiate({"pendulum-chain", {{"N", "8"}, {"agents", "2"}}, ""});
  const ContinuousOcp& ocp = *b.ocp;
  const int N = 8, M = 2;
  const double dt = ocp.horizon / N;
  DiscretizedOcp d = discretize(ocp, N, Integrator::rk4);
  std::mt19937_64 rng(13);
  std::vector<std::vector<Vec>> X(M, std::vector<Vec>(N + 1));
  std::vector<std::vector<double>> U(M, std::vector<double>(N));
  for (int i = 0; i < M; ++i) {
    X[i][0] = ocp.agents[i].x0;
    for (int k = 0; k < N; ++k) U[i][k] = std::uniform_real_distribution<>(-3, 3)(rng);
  }
  auto rhs = [&](int i, const Vec& x, double u, const Vec& xj) {
    const OcpAgent& a = ocp.agents[i];
    return Vec(a.drift(x, Vec::Constant(1, u)) + a.coupling(x, xj));
  };
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < M; ++i) {
      const Vec& x = X[i][k];
      const Vec& xj = X[1 - i][k];
      Vec k1 = rhs(i, x, U[i][k], xj);
      Vec k2 = rhs(i, x + dt / 2 * k1, U[i][k], xj);
      Vec k3 = rhs(i, x + dt / 2 * k2, U[i][k], xj);
      Vec k4 = rhs(i, x + dt * k3, U[i][k], xj);
      X[i][k + 1] = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  PrimalDualPoint p = PrimalDualPoint::zeros(d.nlp);
  for (int i = 0; i < M; ++i) {
    for (int k = 0; k <= N; ++k)
      for (int c = 0; c < 4; ++c) p.agents[i].x[d.state_index(i, k, c)] = X[i][k][c];
    for (int k = 0; k < N; ++k) p.agents[i].x[d.input_index(i, k, 0)] = U[i][k];
  }
  for (int i = 0; i < M; ++i) {
    Vec g = eval_equality(d.nlp.agents[i], gather_blocks(d.nlp, i, p));
    // Dynamics and initial rows hold; the terminal rows measure the distance
    // to the target.
    CHECK(inf_norm(g.head(N * 4 + 4)) < 1e-12);
    CHECK(inf_norm(g.tail(4) - (X[i][N] - *ocp.agents[i].xN)) < 1e-12);
  }
}

TEST_CASE("stage index map is a bijection") {
  BenchmarkInstance b = instantiate({"smart-grid", {{"N", "5"}}, ""});
  DiscretizedOcp d = discretize(*b.ocp, 5, Integrator::heun);
  for (int i = 0; i < b.nlp.agent_count(); ++i) {
    std::set<int> seen;
    for (int k = 0; k <= 5; ++k)
      for (int c = 0; c < d.nx[i]; ++c) {
        int f = d.state_index(i, k, c);
        CHECK(seen.insert(f).second);
        StageIndex s = d.locate(i, f);
        CHECK(s.kind == StageIndex::Kind::state);
        CHECK(s.stage == k);
        CHECK(s.component == c);
      }
    for (int k = 0; k < 5; ++k)
      for (int c = 0; c < d.nu[i]; ++c) {
        int f = d.input_index(i, k, c);
        CHECK(seen.insert(f).second);
        StageIndex s = d.locate(i, f);
        CHECK(s.kind == StageIndex::Kind::input);
        CHECK(s.stage == k);
      }
    CHECK(static_cast<int>(seen.size()) == d.nlp.agents[i].n);
    CHECK(*seen.rbegin() == d.nlp.agents[i].n - 1);
  }
}

TEST_CASE("transcription sizes") {
  BenchmarkInstance b = instantiate({"pendulum-chain", {}, ""});
  // Per cart: 21 states of 4, 20 inputs; dynamics, initial and terminal rows;
  // position and velocity bounds on every stage plus input bounds.
  for (const auto& a : b.nlp.agents) {
    CHECK(a.n == 21 * 4 + 20);
    CHECK(a.n_eq == 20 * 4 + 4 + 4);
    CHECK(a.n_ineq == 21 * 4 + 20 * 2);
  }
}

TEST_CASE("affine split is produced when the scheme keeps coupling additive") {
  CHECK(instantiate({"smart-grid", {}, ""}).nlp.affine_form.has_value());
  CHECK(instantiate({"integrator-ocp", {}, ""}).nlp.affine_form.has_value());
  BenchmarkInstance euler = instantiate({"pendulum-chain", {{"integrator", "euler"}}, ""});
  CHECK(euler.nlp.affine_form.has_value());
  BenchmarkInstance rk4 = instantiate({"pendulum-chain", {}, ""});
  CHECK_FALSE(rk4.nlp.affine_form.has_value());
  CHECK_FALSE(rk4.affine_note.empty());
  CHECK(rk4.preferred_mode == "general");
}

TEST_CASE("closed-form horizon bound") {
  CHECK(*closed_form_tmax_integrator(1, 1, 2) == doctest::Approx(std::sqrt(4.0 / 3)));
  CHECK_FALSE(closed_form_tmax_integrator(1, 1, 0.5).has_value());
  CHECK_FALSE(closed_form_tmax_integrator(2, 1, 1).has_value());
  CHECK_THROWS_AS(closed_form_tmax_integrator(0, 1, 1), Error);
  CHECK_THROWS_AS(closed_form_tmax_integrator(1, -1, 1), Error);
}

TEST_CASE("horizon sweep warm-starts in ascending order") {
  BenchmarkInstance b = instantiate({"integrator-ocp", {}, ""});
  SweepResult s = horizon_sweep(*b.ocp, 2, {1.5, 0.5, 1.0, 2.5}, Integrator::euler);
  REQUIRE(s.rows.size() == 4);
  CHECK(s.rows[0].T == 0.5);
  CHECK(s.rows[3].T == 2.5);
  for (int k = 0; k < 3; ++k) {
    CHECK(s.rows[k].available);
    CHECK(s.rows[k].converges);
  }
  // Beyond T = 2 the iteration no longer contracts or the problem is not convex.
  CHECK_FALSE((s.rows[3].available && s.rows[3].converges));
  REQUIRE(s.empirical_tmax);
  CHECK(*s.empirical_tmax == 1.5);
}

TEST_CASE("log grid") {
  std::vector<double> g = log_grid(0.1, 4.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(0.1));
  CHECK(g.back() == doctest::Approx(4.0));
  CHECK(g[2] == doctest::Approx(std::sqrt(0.4)));
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 3), Error);
}

TEST_CASE("integrator names") {
  CHECK(parse_integrator("rk4") == Integrator::rk4);
  CHECK(parse_integrator("heun") == Integrator::heun);
  CHECK_THROWS_AS(parse_integrator("implicit-euler"), Error);
}
