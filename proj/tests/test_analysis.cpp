#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "helpers.hpp"
#include "sbdp/analysis.hpp"
#include "sbdp/bench.hpp"
#include "sbdp/ocp.hpp"

using namespace sbdp;
using namespace sbdp::test;

TEST_CASE("spectral norm matches the SVD") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const int r = 1 + t % 7, c = 1 + (t * 3) % 9;
    Mat A = random_mat(rng, r, c, 3.0);
    Eigen::JacobiSVD<Mat> svd(A);
    CHECK(spectral_norm(A) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-9));
  }
  CHECK(spectral_norm(Mat::Zero(3, 3)) == 0.0);
  // Repeated top singular value.
  Mat D = Mat::Identity(4, 4);
  CHECK(spectral_norm(D) == doctest::Approx(1.0));
}

TEST_CASE("spectral radius matches the dense eigensolver") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 6;
    Mat A = random_mat(rng, n, n);
    Eigen::EigenSolver<Mat> es(A);
    CHECK(spectral_radius(A) == doctest::Approx(es.eigenvalues().cwiseAbs().maxCoeff()));
  }
  // Nilpotent: radius 0 although the norm is 1.
  Mat N{{0.0, 1.0}, {0.0, 0.0}};
  CHECK(spectral_radius(N) == doctest::Approx(0.0));
  CHECK(spectral_norm(N) == doctest::Approx(1.0));
}

TEST_CASE("M and N of the constrained example match the hand derivation") {
  BenchmarkInstance b = instantiate({"constrained-2agent", {}, ""});
  const double x1 = 0.7, l1 = 0.4, x2 = -1.3;
  PrimalDualPoint p = PrimalDualPoint::from_stacked(b.nlp, Vec{{x1, l1, x2}});
  // p = [x1, lambda1, x2]
  Mat M = build_M(b.nlp, p);
  Mat M_ref{{12 * x1 * x1 - 4 + x2 * x2, 2.0, 0.0},
            {2.0, 0.0, 0.0},
            {0.0, 0.0, 12 * x2 * x2 - 4 + x1 * x1}};
  CHECK((M - M_ref).norm() < 1e-12);
  Mat N = build_N(b.nlp, p);
  Mat N_ref{{x2 * x2, 0.0, 4 * x1 * x2},
            {0.0, 0.0, -1.0},
            {4 * x1 * x2, -1.0, x1 * x1}};
  CHECK((N - N_ref).norm() < 1e-12);
  JacobianAssembly ja = jacobian(b.nlp, p);
  CHECK((ja.J_full + M_ref.inverse() * N_ref).norm() < 1e-12);
}

TEST_CASE("Jacobian matches finite differences of one iteration") {
  for (const char* init : {"minimum-2", "minimum-3"}) {
    BenchmarkInstance b = instantiate({"unconstrained-2agent", {}, init});
    PrimalDualPoint p = central_solve(b.nlp, b.initial);
    JacobianAssembly ja = jacobian(b.nlp, p);
    for (int k = 0; k < 2; ++k) {
      Vec d = Vec::Unit(2, k);
      CHECK(inf_norm(ja.J_full * d - phi_finite_difference(b.nlp, p, d)) < 1e-6);
    }
  }
  BenchmarkInstance b = instantiate({"smart-grid", {{"N", "6"}}, ""});
  PrimalDualPoint p = central_solve(b.nlp, b.initial);
  JacobianAssembly ja = jacobian(b.nlp, p, false);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 3; ++t) {
    Vec d = random_vec(rng, ja.J_full.cols()).normalized();
    Vec jd = ja.J_full * d;
    CHECK((jd - phi_finite_difference(b.nlp, p, d)).norm() <= 1e-5 * std::max(1.0, jd.norm()));
  }
}

TEST_CASE("pruning drops inactive inequality rows and columns") {
  BenchmarkInstance b = instantiate({"smart-grid", {{"N", "6"}}, ""});
  PrimalDualPoint p = central_solve(b.nlp, b.initial);
  JacobianAssembly pruned = jacobian(b.nlp, p, true);
  JacobianAssembly full = jacobian(b.nlp, p, false);
  ActiveSetPartition parts = active_sets(b.nlp, p);
  size_t inactive = 0;
  for (const auto& v : parts.inactive) inactive += v.size();
  CHECK(pruned.kept.size() + inactive == static_cast<size_t>(b.nlp.stacked_size()));
  CHECK(pruned.J.rows() == static_cast<long>(pruned.kept.size()));
  // Rows of inactive multipliers are zero in the full Jacobian, so the
  // nonzero spectrum is unchanged.
  CHECK(spectral_radius(pruned.J) == doctest::Approx(spectral_radius(full.J_full)));
}

TEST_CASE("integrator OCP spectral radius follows w dt^2 / (r + q dt^2)") {
  for (double T : {0.3, 0.8, 1.5}) {
    BenchmarkInstance b = instantiate({"integrator-ocp", {{"T", std::to_string(T)}}, ""});
    PrimalDualPoint p = central_solve(b.nlp, b.initial);
    const double dt = T / 2;
    const double expected = 2 * dt * dt / (1 + dt * dt);
    CHECK(spectral_radius(jacobian(b.nlp, p).J) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("certify reports order, rate and radius") {
  BenchmarkInstance b = instantiate({"unconstrained-2agent", {}, "minimum-2"});
  PrimalDualPoint p = central_solve(b.nlp, b.initial);
  CertifyOptions o;
  o.sample_pairs = 30;
  ConvergenceEstimate c = certify(b.nlp, p, o);
  CHECK(c.order == ConvergenceOrder::linear);
  CHECK(c.rate == doctest::Approx(c.spectral_radius));
  CHECK(c.radius == doctest::Approx(2 * (1 - c.spectral_radius) / c.lipschitz_estimate));
  CHECK(c.lipschitz_estimate > 0);
  // Not a KKT point.
  CHECK_THROWS_AS(certify(b.nlp, b.initial, o), Error);
}

TEST_CASE("certify is deterministic for a fixed seed") {
  BenchmarkInstance b = instantiate({"constrained-2agent", {}, ""});
  PrimalDualPoint p = central_solve(b.nlp, b.initial);
  ConvergenceEstimate a = certify(b.nlp, p), c = certify(b.nlp, p);
  CHECK(a.lipschitz_estimate == c.lipschitz_estimate);
  CHECK(a.radius == c.radius);
}

TEST_CASE("order classification and radius formula") {
  CHECK(classify_order(0.0) == ConvergenceOrder::quadratic);
  CHECK(classify_order(1e-12) == ConvergenceOrder::quadratic);
  CHECK(classify_order(0.5) == ConvergenceOrder::linear);
  CHECK(classify_order(1.0) == ConvergenceOrder::none);
  CHECK(classify_order(2.0) == ConvergenceOrder::none);
  CHECK(convergence_radius(0.5, 2.0) == doctest::Approx(0.5));
  CHECK(convergence_radius(1.2, 2.0) == 0.0);
}

TEST_CASE("observed rates") {
  std::vector<double> r = observed_rates(std::vector<double>{1.0, 0.5, 0.125, 0.0, 0.0});
  REQUIRE(r.size() == 3);
  CHECK(r[0] == 0.5);
  CHECK(r[1] == 0.25);
  CHECK(r[2] == 0.0);
}
