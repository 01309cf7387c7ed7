#include "sbdp/bench.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "sbdp/local_solver.hpp"

namespace sbdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + v[k];
  return s;
}

// Default parameter table with checked overrides.
class Params {
 public:
  Params(const std::string& id, const std::map<std::string, std::string>& overrides,
         std::vector<std::pair<std::string, std::string>> defaults)
      : id_(id) {
    for (auto& [k, v] : defaults) values_[k] = v;
    for (const auto& [k, v] : overrides) {
      if (!values_.count(k)) {
        std::vector<std::string> names;
        for (const auto& [n, d] : values_) names.push_back(n);
        throw Error(ErrorKind::config_error,
                    "unknown parameter '" + k + "' for benchmark " + id +
                        (names.empty() ? " (it takes none)" : "; valid: " + join(names)),
                    -1, k);
      }
      values_[k] = v;
    }
  }

  double num(const std::string& k) const {
    const std::string& v = values_.at(k);
    try {
      size_t used = 0;
      double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw Error(ErrorKind::config_error,
                  "parameter '" + k + "' of " + id_ + " is not a number: " + v, -1, k);
    }
  }

  int integer(const std::string& k) const {
    const double x = num(k);
    if (x != std::floor(x) || std::abs(x) > 1e9)
      throw Error(ErrorKind::config_error, "parameter '" + k + "' must be an integer", -1, k);
    return static_cast<int>(x);
  }

  const std::string& text(const std::string& k) const { return values_.at(k); }
  void set(const std::string& k, const std::string& v) { values_[k] = v; }
  const std::map<std::string, std::string>& all() const { return values_; }

 private:
  std::string id_;
  std::map<std::string, std::string> values_;
};

const std::map<std::string, std::vector<std::pair<std::string, std::string>>>& defaults() {
  static const std::map<std::string, std::vector<std::pair<std::string, std::string>>> d = {
      {"constrained-2agent", {}},
      {"unconstrained-2agent", {{"partition", "good"}}},
      {"integrator-ocp",
       {{"agents", "2"},
        {"q", "1"},
        {"r", "1"},
        {"w", "2"},
        {"N", "2"},
        {"T", "1"},
        {"integrator", "euler"}}},
      {"pendulum-chain",
       {{"scale", "desk"},
        {"agents", "3"},
        {"N", "20"},
        {"T", "1"},
        {"c", "0.25"},
        {"mc", "1"},
        {"ml", "0.25"},
        {"l", "0.5"},
        {"g", "9.81"},
        {"umax", "75"},
        {"vmax", "4"},
        {"margin", "0.25"},
        {"integrator", "rk4"}}},
      {"smart-grid",
       {{"agents", "6"},
        {"hops", "1"},
        {"N", "20"},
        {"T", "1"},
        {"I", "0.2"},
        {"A", "0.1"},
        {"D", "0.5"},
        {"q", "1"},
        {"p", "1"},
        {"R", "1"},
        {"load", "0.1"},
        {"umax", "0.3"},
        {"integrator", "heun"}}},
  };
  return d;
}

// Two scalar agents coupled both ways.
CouplingGraph pair_graph() { return CouplingGraph({{1}, {0}}); }

void set_start(BenchmarkInstance& b, const Vec& x) {
  b.initial = PrimalDualPoint::zeros(b.nlp);
  int at = 0;
  for (int i = 0; i < b.nlp.agent_count(); ++i) {
    b.initial.agents[i].x = x.segment(at, b.nlp.agents[i].n);
    at += b.nlp.agents[i].n;
  }
}

// min sum_i x_i^2 (x_i^2 - 2) + x_1^2 x_2^2  s.t. 2 x_1 - 2 - x_2 = 0.
BenchmarkInstance constrained_2agent(const Params& prm, const std::string& init) {
  (void)prm;
  BenchmarkInstance b;
  b.nlp.graph = pair_graph();
  std::vector<NeighborAffineFunctions> form(2);
  for (int i = 0; i < 2; ++i) {
    AgentFunctions f;
    f.n = 1;
    f.n_eq = i == 0 ? 1 : 0;
    f.objective = [](const Blocks& b) {
      const double xi = b[0][0], xj = b[1][0];
      return xi * xi * (xi * xi - 2) + 0.5 * xi * xi * xj * xj;
    };
    f.objective_gradient = [](const Blocks& b, int k) {
      const double xi = b[0][0], xj = b[1][0];
      Vec g(1);
      g[0] = k == 0 ? 4 * xi * xi * xi - 4 * xi + xi * xj * xj : xi * xi * xj;
      return g;
    };
    f.equality = [i](const Blocks& b) {
      Vec g(i == 0 ? 1 : 0);
      if (i == 0) g[0] = 2 * b[0][0] - 2 - b[1][0];
      return g;
    };
    f.equality_jacobian = [i](const Blocks&, int k) {
      Mat J(i == 0 ? 1 : 0, 1);
      if (i == 0) J(0, 0) = k == 0 ? 2.0 : -1.0;
      return J;
    };
    f.inequality = [](const Blocks&) { return Vec(0); };
    f.inequality_jacobian = [](const Blocks&, int) { return Mat(0, 1); };
    f.lagrangian_hessian = [](const Blocks& b, const Vec&, const Vec&, int r, int c) {
      const double xi = b[0][0], xj = b[1][0];
      Mat H(1, 1);
      if (r == 0 && c == 0) H(0, 0) = 12 * xi * xi - 4 + xj * xj;
      else if (r != c) H(0, 0) = 2 * xi * xj;
      else H(0, 0) = xi * xi;
      return H;
    };
    b.nlp.agents.push_back(f);

    NeighborAffineFunctions& a = form[i];
    a.objective = [](const Vec& x) { return x[0] * x[0] * (x[0] * x[0] - 2); };
    a.equality = [i](const Vec& x) {
      Vec g(i == 0 ? 1 : 0);
      if (i == 0) g[0] = 2 * x[0] - 2;
      return g;
    };
    a.inequality = [](const Vec&) { return Vec(0); };
    PairTerms p;
    p.objective = [](const Vec& xi, const Vec& xj) { return 0.5 * xi[0] * xi[0] * xj[0] * xj[0]; };
    p.objective_gradient_j = [](const Vec& xi, const Vec& xj) {
      return Vec::Constant(1, xi[0] * xi[0] * xj[0]);
    };
    if (i == 0) {
      p.equality = [](const Vec&, const Vec& xj) { return Vec::Constant(1, -xj[0]); };
      p.equality_jacobian_j = [](const Vec&, const Vec&) { return Mat::Constant(1, 1, -1.0); };
    }
    a.pairs.push_back(p);
  }
  b.nlp.affine_form = std::move(form);

  if (init.empty() || init == "offset") {
    set_start(b, Vec{{1.0, -1.0}});
  } else if (init == "zeros") {
    b.initial = PrimalDualPoint::zeros(b.nlp);
  } else {
    throw Error(ErrorKind::config_error,
                "unknown initializer '" + init + "' for constrained-2agent; valid: offset, zeros");
  }
  return b;
}

// min sum_i x_i^2 + x_j^2 sin x_i, in the compatible or the incompatible partition.
BenchmarkInstance unconstrained_2agent(const Params& prm, const std::string& init) {
  BenchmarkInstance b;
  b.nlp.graph = pair_graph();
  const std::string& part = prm.text("partition");
  if (part != "good" && part != "bad")
    throw Error(ErrorKind::config_error, "partition must be 'good' or 'bad'", -1, "partition");
  const bool good = part == "good";

  // f_i = own_sq x_i^2 + sin_term x_j^2 sin x_i + nbr_sq x_j^2
  struct Coeff {
    double own_sq, sin_term, nbr_sq;
  };
  std::vector<Coeff> co = good ? std::vector<Coeff>{{1, 1, 0}, {1, 1, 0}}
                               : std::vector<Coeff>{{1, 1, 1}, {0, 1, 0}};
  std::vector<NeighborAffineFunctions> form(2);
  for (int i = 0; i < 2; ++i) {
    const Coeff c = co[i];
    AgentFunctions f;
    f.n = 1;
    f.objective = [c](const Blocks& b) {
      const double xi = b[0][0], xj = b[1][0];
      return c.own_sq * xi * xi + c.sin_term * xj * xj * std::sin(xi) + c.nbr_sq * xj * xj;
    };
    f.objective_gradient = [c](const Blocks& b, int k) {
      const double xi = b[0][0], xj = b[1][0];
      Vec g(1);
      g[0] = k == 0 ? 2 * c.own_sq * xi + c.sin_term * xj * xj * std::cos(xi)
                    : 2 * c.sin_term * xj * std::sin(xi) + 2 * c.nbr_sq * xj;
      return g;
    };
    f.equality = [](const Blocks&) { return Vec(0); };
    f.inequality = [](const Blocks&) { return Vec(0); };
    f.equality_jacobian = [](const Blocks&, int) { return Mat(0, 1); };
    f.inequality_jacobian = [](const Blocks&, int) { return Mat(0, 1); };
    f.lagrangian_hessian = [c](const Blocks& b, const Vec&, const Vec&, int r, int s) {
      const double xi = b[0][0], xj = b[1][0];
      Mat H(1, 1);
      if (r == 0 && s == 0) H(0, 0) = 2 * c.own_sq - c.sin_term * xj * xj * std::sin(xi);
      else if (r != s) H(0, 0) = 2 * c.sin_term * xj * std::cos(xi);
      else H(0, 0) = 2 * c.sin_term * std::sin(xi) + 2 * c.nbr_sq;
      return H;
    };
    b.nlp.agents.push_back(f);

    NeighborAffineFunctions& a = form[i];
    a.objective = [c](const Vec& x) { return c.own_sq * x[0] * x[0]; };
    a.equality = [](const Vec&) { return Vec(0); };
    a.inequality = [](const Vec&) { return Vec(0); };
    PairTerms p;
    p.objective = [c](const Vec& xi, const Vec& xj) {
      return xj[0] * xj[0] * (c.sin_term * std::sin(xi[0]) + c.nbr_sq);
    };
    p.objective_gradient_j = [c](const Vec& xi, const Vec& xj) {
      return Vec::Constant(1, 2 * xj[0] * (c.sin_term * std::sin(xi[0]) + c.nbr_sq));
    };
    a.pairs.push_back(p);
  }
  b.nlp.affine_form = std::move(form);

  const double h = std::numbers::pi / 2;
  b.reference_minima = {Vec{{0.0, 0.0}}, Vec{{-h, -h}}, Vec{{3 * h, 3 * h}}};
  const std::string sel = init.empty() ? "minimum-1" : init;
  if (sel == "zeros") {
    b.initial = PrimalDualPoint::zeros(b.nlp);
  } else if (sel == "minimum-1" || sel == "minimum-2" || sel == "minimum-3") {
    const int n = sel.back() - '1';
    const Vec shift = Vec::Constant(2, n == 2 ? -0.25 : 0.25);
    set_start(b, b.reference_minima[n] + shift);
  } else {
    throw Error(ErrorKind::config_error,
                "unknown initializer '" + sel +
                    "' for unconstrained-2agent; valid: minimum-1, minimum-2, minimum-3, zeros");
  }
  return b;
}

void finish_ocp(BenchmarkInstance& b, const ContinuousOcp& ocp, int N, Integrator m) {
  DiscretizedOcp d = discretize(ocp, N, m);
  b.nlp = d.nlp;
  b.ocp = ocp;
  b.N = N;
  b.integrator = m;
  b.affine_note = d.affine_note;
  b.initial = initial_guess(d, ocp);
}

// Scalar integrators with l_i = q x_i^2 + r u_i^2 + w x_i sum_j x_j.
BenchmarkInstance integrator_ocp(const Params& prm, const std::string& init) {
  const int M = prm.integer("agents");
  const double q = prm.num("q"), r = prm.num("r"), w = prm.num("w");
  if (M < 2) throw Error(ErrorKind::config_error, "integrator-ocp needs at least 2 agents");
  ContinuousOcp ocp;
  ocp.graph = CouplingGraph::ring(M, 1);
  ocp.horizon = prm.num("T");
  for (int i = 0; i < M; ++i) {
    OcpAgent a;
    a.nx = 1;
    a.nu = 1;
    a.x0 = Vec::Constant(1, i + 1.0);
    a.drift = [](const Vec&, const Vec& u) { return u; };
    a.drift_jacobian = [](const Vec&, const Vec&, Mat& fx, Mat& fu) {
      fx = Mat::Zero(1, 1);
      fu = Mat::Identity(1, 1);
    };
    a.stage_cost = [q, r](const Vec& x, const Vec& u) { return q * x[0] * x[0] + r * u[0] * u[0]; };
    a.stage_cost_gradient = [q, r](const Vec& x, const Vec& u, Vec& gx, Vec& gu) {
      gx = Vec::Constant(1, 2 * q * x[0]);
      gu = Vec::Constant(1, 2 * r * u[0]);
    };
    a.coupling_cost = [w](const Vec& x, const Vec& xj) { return w * x[0] * xj[0]; };
    a.coupling_cost_gradient = [w](const Vec& x, const Vec& xj, Vec& gx, Vec& gj) {
      gx = Vec::Constant(1, w * xj[0]);
      gj = Vec::Constant(1, w * x[0]);
    };
    ocp.agents.push_back(a);
  }
  BenchmarkInstance b;
  finish_ocp(b, ocp, prm.integer("N"), parse_integrator(prm.text("integrator")));
  if (!init.empty() && init != "interpolation") {
    if (init != "zeros")
      throw Error(ErrorKind::config_error,
                  "unknown initializer '" + init + "' for integrator-ocp; valid: interpolation, zeros");
    b.initial = PrimalDualPoint::zeros(b.nlp);
  }
  return b;
}

struct Cart {
  double mc, ml, l, g;
};

// Cart-pole accelerations (y'', theta'') for total horizontal force u + F,
// with partial derivatives in theta, theta' and the force.
struct Accel {
  double ydd, tdd;
  double ydd_th, ydd_thd, ydd_f;
  double tdd_th, tdd_thd, tdd_f;
};

Accel cart_accel(const Cart& p, double th, double thd, double force) {
  const double s = std::sin(th), c = std::cos(th);
  const double D = p.mc + p.ml * s * s;
  const double dD = 2 * p.ml * s * c;
  Accel a;
  const double Ny = p.ml * s * (p.l * thd * thd - p.g * c) + force;
  const double Ny_th = p.ml * c * (p.l * thd * thd - p.g * c) + p.ml * p.g * s * s;
  a.ydd = Ny / D;
  a.ydd_th = (Ny_th * D - Ny * dD) / (D * D);
  a.ydd_thd = 2 * p.ml * s * p.l * thd / D;
  a.ydd_f = 1 / D;
  const double inner = p.ml * p.l * thd * thd * s + force;
  const double Nt = (p.mc + p.ml) * p.g * s - inner * c;
  const double Nt_th = (p.mc + p.ml) * p.g * c - p.ml * p.l * thd * thd * c * c + inner * s;
  a.tdd = Nt / (p.l * D);
  a.tdd_th = (Nt_th * D - Nt * dD) / (p.l * D * D);
  a.tdd_thd = -2 * p.ml * p.l * thd * s * c / (p.l * D);
  a.tdd_f = -c / (p.l * D);
  return a;
}

// Carts on a line with springs c (y_j - y_i) to their neighbors, state
// [y, y', theta, theta'], side-stepping from y = i to y = i + 1.
BenchmarkInstance pendulum_chain(Params& prm, const std::string& init) {
  if (prm.text("scale") == "full") {
    // Full scale unless explicitly overridden.
    if (prm.text("agents") == "3") prm.set("agents", "10");
    if (prm.text("N") == "20") prm.set("N", "80");
  } else if (prm.text("scale") != "desk") {
    throw Error(ErrorKind::config_error, "scale must be 'desk' or 'full'", -1, "scale");
  }
  const int M = prm.integer("agents");
  const Cart cart{prm.num("mc"), prm.num("ml"), prm.num("l"), prm.num("g")};
  const double c = prm.num("c"), umax = prm.num("umax"), vmax = prm.num("vmax"),
               margin = prm.num("margin");
  if (M < 1) throw Error(ErrorKind::config_error, "pendulum-chain needs at least one agent");

  ContinuousOcp ocp;
  ocp.graph = CouplingGraph::chain(M);
  ocp.horizon = prm.num("T");
  ocp.integrate_stage_cost = false;
  for (int i = 0; i < M; ++i) {
    OcpAgent a;
    a.nx = 4;
    a.nu = 1;
    a.x0 = Vec{{double(i), 0, 0, 0}};
    a.xN = Vec{{double(i + 1), 0, 0, 0}};
    a.drift = [cart](const Vec& x, const Vec& u) {
      Accel ac = cart_accel(cart, x[2], x[3], u[0]);
      return Vec{{x[1], ac.ydd, x[3], ac.tdd}};
    };
    a.drift_jacobian = [cart](const Vec& x, const Vec& u, Mat& fx, Mat& fu) {
      Accel ac = cart_accel(cart, x[2], x[3], u[0]);
      fx = Mat::Zero(4, 4);
      fx(0, 1) = 1;
      fx(1, 2) = ac.ydd_th;
      fx(1, 3) = ac.ydd_thd;
      fx(2, 3) = 1;
      fx(3, 2) = ac.tdd_th;
      fx(3, 3) = ac.tdd_thd;
      fu = Mat::Zero(4, 1);
      fu(1, 0) = ac.ydd_f;
      fu(3, 0) = ac.tdd_f;
    };
    // Spring force enters the accelerations linearly, so each neighbor adds
    // the difference between the forced and the unforced response.
    a.coupling = [cart, c](const Vec& x, const Vec& xj) {
      const double F = c * (xj[0] - x[0]);
      Accel with = cart_accel(cart, x[2], x[3], F), without = cart_accel(cart, x[2], x[3], 0);
      return Vec{{0, with.ydd - without.ydd, 0, with.tdd - without.tdd}};
    };
    a.coupling_jacobian = [cart, c](const Vec& x, const Vec& xj, Mat& fx, Mat& fj) {
      const double F = c * (xj[0] - x[0]);
      Accel w = cart_accel(cart, x[2], x[3], F), o = cart_accel(cart, x[2], x[3], 0);
      fx = Mat::Zero(4, 4);
      fx(1, 0) = -c * w.ydd_f;
      fx(1, 2) = w.ydd_th - o.ydd_th;
      fx(1, 3) = w.ydd_thd - o.ydd_thd;
      fx(3, 0) = -c * w.tdd_f;
      fx(3, 2) = w.tdd_th - o.tdd_th;
      fx(3, 3) = w.tdd_thd - o.tdd_thd;
      fj = Mat::Zero(4, 4);
      fj(1, 0) = c * w.ydd_f;
      fj(3, 0) = c * w.tdd_f;
    };
    a.stage_cost = [](const Vec& x, const Vec& u) { return x.squaredNorm() + u[0] * u[0]; };
    a.stage_cost_gradient = [](const Vec& x, const Vec& u, Vec& gx, Vec& gu) {
      gx = 2 * x;
      gu = 2 * u;
    };
    a.x_lower = Vec{{i - margin, -vmax, -kInf, -kInf}};
    a.x_upper = Vec{{i + 1 + margin, vmax, kInf, kInf}};
    a.u_lower = Vec::Constant(1, -umax);
    a.u_upper = Vec::Constant(1, umax);
    ocp.agents.push_back(a);
  }
  BenchmarkInstance b;
  finish_ocp(b, ocp, prm.integer("N"), parse_integrator(prm.text("integrator")));

  const std::string sel = init.empty() ? "decentralized" : init;
  if (sel == "decentralized") {
    // Each agent solves its own problem against interpolated neighbors with
    // zero sensitivities.
    const PrimalDualPoint interp = b.initial;
    SolverSettings s;
    s.max_sqp_iterations = 200;
    for (int i = 0; i < M; ++i) {
      LocalProblemInstance li;
      li.agent = i;
      for (int j : b.nlp.graph.neighbors(i)) li.neighbor_x.push_back(interp.agents[j].x);
      li.sensitivity_sum = Vec::Zero(b.nlp.agents[i].n);
      li.anchor = interp.agents[i].x;
      li.warm_start = interp.agents[i];
      try {
        LocalSolveResult r = solve_local_nlp(b.nlp, li, s);
        if (r.status == SqpStatus::converged) b.initial.agents[i] = r.point;
      } catch (const Error&) {
        // keep the interpolation for this agent
      }
    }
  } else if (sel != "interpolation") {
    throw Error(ErrorKind::config_error,
                "unknown initializer '" + sel + "' for pendulum-chain; valid: decentralized, interpolation");
  }
  return b;
}

// Swing-equation grid: generators on even (0-based) agents with bounded
// power input, constant loads on odd agents.
BenchmarkInstance smart_grid(const Params& prm, const std::string& init) {
  const int M = prm.integer("agents"), hops = prm.integer("hops");
  const double I = prm.num("I"), A = prm.num("A"), D = prm.num("D"), q = prm.num("q"),
               pw = prm.num("p"), R = prm.num("R"), load = prm.num("load"),
               umax = prm.num("umax");
  if (M < 2) throw Error(ErrorKind::config_error, "smart-grid needs at least 2 agents");
  if (hops < 1 || hops > 3) throw Error(ErrorKind::config_error, "hops must be 1, 2 or 3", -1, "hops");
  if (!(I > 0) || !(D > 0) || !(A > 0))
    throw Error(ErrorKind::config_error, "I, D and A must be positive");

  ContinuousOcp ocp;
  ocp.graph = CouplingGraph::ring(M, hops);
  ocp.horizon = prm.num("T");
  for (int i = 0; i < M; ++i) {
    const bool generator = i % 2 == 0;
    const double d = generator ? 0.0 : load;
    OcpAgent a;
    a.nx = 2;
    a.nu = generator ? 1 : 0;
    a.x0 = Vec::Zero(2);
    a.drift = [I, D, d, generator](const Vec& x, const Vec& u) {
      const double uu = generator ? u[0] : 0.0;
      return Vec{{x[1], (-D * x[1] + uu + d) / I}};
    };
    a.drift_jacobian = [I, D, generator](const Vec&, const Vec&, Mat& fx, Mat& fu) {
      fx = Mat::Zero(2, 2);
      fx(0, 1) = 1;
      fx(1, 1) = -D / I;
      fu = Mat::Zero(2, generator ? 1 : 0);
      if (generator) fu(1, 0) = 1 / I;
    };
    a.coupling = [I, A](const Vec& x, const Vec& xj) {
      return Vec{{0, A * std::sin(x[0] - xj[0]) / I}};
    };
    a.coupling_jacobian = [I, A](const Vec& x, const Vec& xj, Mat& fx, Mat& fj) {
      const double c = A * std::cos(x[0] - xj[0]) / I;
      fx = Mat::Zero(2, 2);
      fx(1, 0) = c;
      fj = Mat::Zero(2, 2);
      fj(1, 0) = -c;
    };
    a.stage_cost = [q, R, generator](const Vec& x, const Vec& u) {
      return q * x[1] * x[1] + (generator ? R * u[0] * u[0] : 0.0);
    };
    a.stage_cost_gradient = [q, R, generator](const Vec& x, const Vec& u, Vec& gx, Vec& gu) {
      gx = Vec{{0, 2 * q * x[1]}};
      gu = generator ? Vec::Constant(1, 2 * R * u[0]) : Vec(0);
    };
    a.terminal_cost = [pw](const Vec& x) { return pw * x[1] * x[1]; };
    a.terminal_cost_gradient = [pw](const Vec& x) { return Vec{{0, 2 * pw * x[1]}}; };
    if (generator) {
      a.u_lower = Vec::Constant(1, -umax);
      a.u_upper = Vec::Constant(1, umax);
    }
    ocp.agents.push_back(a);
  }
  BenchmarkInstance b;
  finish_ocp(b, ocp, prm.integer("N"), parse_integrator(prm.text("integrator")));
  if (!init.empty() && init != "interpolation" && init != "zeros")
    throw Error(ErrorKind::config_error,
                "unknown initializer '" + init + "' for smart-grid; valid: interpolation, zeros");
  return b;
}

}  // namespace

const std::vector<std::string>& benchmark_ids() {
  static const std::vector<std::string> ids = {"constrained-2agent", "unconstrained-2agent",
                                               "integrator-ocp", "pendulum-chain", "smart-grid"};
  return ids;
}

std::vector<std::string> benchmark_parameters(const std::string& id) {
  auto it = defaults().find(id);
  if (it == defaults().end())
    throw Error(ErrorKind::unknown_benchmark,
                "unknown benchmark '" + id + "'; valid ids: " + join(benchmark_ids()));
  std::vector<std::string> names;
  for (const auto& [k, v] : it->second) names.push_back(k);
  return names;
}

BenchmarkInstance instantiate(const BenchmarkSpec& spec) {
  auto it = defaults().find(spec.id);
  if (it == defaults().end())
    throw Error(ErrorKind::unknown_benchmark,
                "unknown benchmark '" + spec.id + "'; valid ids: " + join(benchmark_ids()));
  Params prm(spec.id, spec.overrides, it->second);
  BenchmarkInstance b;
  if (spec.id == "constrained-2agent") b = constrained_2agent(prm, spec.initializer);
  else if (spec.id == "unconstrained-2agent") b = unconstrained_2agent(prm, spec.initializer);
  else if (spec.id == "integrator-ocp") b = integrator_ocp(prm, spec.initializer);
  else if (spec.id == "pendulum-chain") b = pendulum_chain(prm, spec.initializer);
  else b = smart_grid(prm, spec.initializer);
  b.id = spec.id;
  b.parameters = prm.all();
  b.preferred_mode = b.nlp.affine_form ? "neighbor-affine" : "general";
  b.nlp.check_structure();
  return b;
}

PrimalDualPoint central_solve(const PartitionedNlp& nlp, const PrimalDualPoint& start) {
  SolverSettings s;
  s.kkt_tolerance = 1e-10;
  s.max_sqp_iterations = 300;
  return solve_central(nlp, start, s, 1e-8);
}

}  // namespace sbdp
