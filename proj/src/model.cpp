#include "sbdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sbdp/derivatives.hpp"

namespace sbdp {

namespace {

void check_agent(const PartitionedNlp& nlp, int i) {
  if (i < 0 || i >= nlp.agent_count())
    throw Error(ErrorKind::invalid_parameter, "agent index out of range", i);
}

int neighbor_slot(const PartitionedNlp& nlp, int i, int j) {
  check_agent(nlp, i);
  int s = nlp.graph.slot(i, j);
  if (s < 0)
    throw Error(ErrorKind::invalid_neighbor,
                "agent " + std::to_string(j) + " is not a neighbor of agent " + std::to_string(i),
                i);
  return s;
}

double rel_dev(const Mat& a, const Mat& ref) {
  if (a.size() == 0) return 0.0;
  return (a - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff());
}

}  // namespace

double local_lagrangian(const PartitionedNlp& nlp, int i, const PrimalDualPoint& point) {
  check_agent(nlp, i);
  point.check_dimensions(nlp);
  const auto& a = nlp.agents[i];
  const auto& ap = point.agents[i];
  Blocks b = gather_blocks(nlp, i, point);
  double L = eval_objective(a, b);
  if (a.n_eq > 0) L += ap.lambda.dot(eval_equality(a, b));
  if (a.n_ineq > 0) L += ap.mu.dot(eval_inequality(a, b));
  return L;
}

Vec general_sensitivity(const PartitionedNlp& nlp, int i, int j, const PrimalDualPoint& point) {
  int s = neighbor_slot(nlp, i, j);
  point.check_dimensions(nlp);
  Blocks b = gather_blocks(nlp, i, point);
  return lagrangian_gradient(nlp.agents[i], b, point.agents[i].lambda, point.agents[i].mu,
                             s + 1);
}

Vec neighbor_affine_sensitivity(const PartitionedNlp& nlp, int i, int j,
                                const PrimalDualPoint& point) {
  if (!nlp.affine_form)
    throw Error(ErrorKind::unsupported_structure, "problem has no neighbor-affine form", i);
  int s = neighbor_slot(nlp, i, j);
  point.check_dimensions(nlp);
  const auto& ap = point.agents[i];
  return pair_sensitivity((*nlp.affine_form)[i].pairs[s], ap.x, point.agents[j].x, ap.lambda,
                          ap.mu);
}

Vec central_kkt_residual(const PartitionedNlp& nlp, const PrimalDualPoint& point) {
  point.check_dimensions(nlp);
  Vec F(nlp.stacked_size());
  int off = 0;
  for (int i = 0; i < nlp.agent_count(); ++i) {
    const auto& a = nlp.agents[i];
    const auto& ap = point.agents[i];
    Blocks b = gather_blocks(nlp, i, point);
    Vec grad = lagrangian_gradient(a, b, ap.lambda, ap.mu, 0);
    for (int k : nlp.graph.dependents(i)) {
      Blocks bk = gather_blocks(nlp, k, point);
      grad += lagrangian_gradient(nlp.agents[k], bk, point.agents[k].lambda,
                                  point.agents[k].mu, nlp.graph.slot(k, i) + 1);
    }
    F.segment(off, a.n) = grad;
    off += a.n;
    F.segment(off, a.n_eq) = eval_equality(a, b);
    off += a.n_eq;
    F.segment(off, a.n_ineq) = ap.mu.cwiseProduct(eval_inequality(a, b));
    off += a.n_ineq;
  }
  return F;
}

double central_kkt_error(const PartitionedNlp& nlp, const PrimalDualPoint& point) {
  Vec F = central_kkt_residual(nlp, point);
  double err = F.size() ? F.cwiseAbs().maxCoeff() : 0.0;
  for (int i = 0; i < nlp.agent_count(); ++i) {
    const auto& a = nlp.agents[i];
    if (a.n_ineq == 0) continue;
    Vec h = eval_inequality(a, gather_blocks(nlp, i, point));
    err = std::max(err, h.maxCoeff());
    err = std::max(err, (-point.agents[i].mu).maxCoeff());
  }
  return err;
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::warn: return "warn";
    case CheckStatus::fail: return "fail";
  }
  return "?";
}

bool ValidationReport::passed() const {
  for (const auto& c : checks)
    if (c.status == CheckStatus::fail) return false;
  return true;
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate_partition(const PartitionedNlp& nlp, const ValidationOptions& opt) {
  ValidationReport report;
  auto add = [&](std::string name, bool ok, double dev, std::string detail,
                 CheckStatus bad = CheckStatus::fail) {
    report.checks.push_back(
        {std::move(name), ok ? CheckStatus::pass : bad, dev, std::move(detail)});
  };

  try {
    nlp.check_structure();
    add("structure", true, 0.0, "");
  } catch (const Error& e) {
    add("structure", false, 0.0, e.what());
    return report;
  }
  add("symmetry", nlp.graph.symmetric(), 0.0,
      nlp.graph.symmetric() ? "" : "coupling graph is directed", CheckStatus::warn);

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  PrimalDualPoint center = opt.center ? *opt.center : PrimalDualPoint::zeros(nlp);

  double dev_dim = 0, dev_fg = 0, dev_gj = 0, dev_hj = 0, dev_hess = 0, dev_aff = 0,
         dev_affd = 0;
  std::string dim_detail;
  bool eval_ok = true;
  std::string eval_detail;

  for (int s = 0; s < opt.sample_points; ++s) {
    PrimalDualPoint p = center;
    for (auto& ap : p.agents) {
      for (int k = 0; k < ap.x.size(); ++k) ap.x(k) += opt.sample_scale * unit(rng);
      for (int k = 0; k < ap.lambda.size(); ++k) ap.lambda(k) = unit(rng);
      for (int k = 0; k < ap.mu.size(); ++k) ap.mu(k) = 0.5 * (unit(rng) + 1.0);
    }
    try {
      for (int i = 0; i < nlp.agent_count(); ++i) {
        const auto& a = nlp.agents[i];
        const auto& ap = p.agents[i];
        Blocks b = gather_blocks(nlp, i, p);
        const int nb = static_cast<int>(b.size());
        eval_objective(a, b);
        Vec g = eval_equality(a, b);
        Vec h = eval_inequality(a, b);

        for (int blk = 0; blk < nb; ++blk) {
          auto restrict_to = [&](auto f) {
            return [&, f, blk](const Vec& v) {
              Blocks l = b;
              l[blk] = v;
              return f(l);
            };
          };
          if (a.objective_gradient) {
            Vec fd = fd_gradient(restrict_to([&a](const Blocks& l) { return a.objective(l); }),
                                 b[blk]);
            dev_fg = std::max(dev_fg, rel_dev(a.objective_gradient(b, blk), fd));
          }
          if (a.equality_jacobian && a.n_eq > 0) {
            Mat fd = fd_jacobian(restrict_to([&a](const Blocks& l) { return a.equality(l); }),
                                 b[blk], a.n_eq);
            dev_gj = std::max(dev_gj, rel_dev(a.equality_jacobian(b, blk), fd));
          }
          if (a.inequality_jacobian && a.n_ineq > 0) {
            Mat fd = fd_jacobian(
                restrict_to([&a](const Blocks& l) { return a.inequality(l); }), b[blk],
                a.n_ineq);
            dev_hj = std::max(dev_hj, rel_dev(a.inequality_jacobian(b, blk), fd));
          }
        }
        if (a.lagrangian_hessian) {
          AgentFunctions no_hess = a;
          no_hess.lagrangian_hessian = nullptr;
          for (int r = 0; r < nb; ++r)
            for (int c = 0; c < nb; ++c)
              dev_hess = std::max(
                  dev_hess, rel_dev(a.lagrangian_hessian(b, ap.lambda, ap.mu, r, c),
                                    lagrangian_hessian(no_hess, b, ap.lambda, ap.mu, r, c)));
        }

        if (nlp.affine_form) {
          const auto& af = (*nlp.affine_form)[i];
          const auto& nbrs = nlp.graph.neighbors(i);
          double f_sum = af.objective ? af.objective(ap.x) : 0.0;
          Vec g_sum = a.n_eq ? (af.equality ? af.equality(ap.x) : Vec(Vec::Zero(a.n_eq)))
                             : Vec(0);
          Vec h_sum = a.n_ineq ? (af.inequality ? af.inequality(ap.x)
                                                : Vec(Vec::Zero(a.n_ineq)))
                               : Vec(0);
          if (g_sum.size() != a.n_eq || h_sum.size() != a.n_ineq) {
            dev_dim = std::max(dev_dim, 1.0);
            dim_detail = "affine local term has wrong length (agent " + std::to_string(i) + ")";
          }
          for (size_t k = 0; k < nbrs.size(); ++k) {
            const auto& t = af.pairs[k];
            const Vec& xj = p.agents[nbrs[k]].x;
            if (t.objective) f_sum += t.objective(ap.x, xj);
            if (t.equality && a.n_eq) g_sum += t.equality(ap.x, xj);
            if (t.inequality && a.n_ineq) h_sum += t.inequality(ap.x, xj);
            Vec exact = lagrangian_gradient(a, b, ap.lambda, ap.mu, static_cast<int>(k) + 1);
            PairTerms fd_only = t;
            fd_only.objective_gradient_j = nullptr;
            fd_only.equality_jacobian_j = nullptr;
            fd_only.inequality_jacobian_j = nullptr;
            dev_affd = std::max(dev_affd,
                                rel_dev(pair_sensitivity(t, ap.x, xj, ap.lambda, ap.mu),
                                        pair_sensitivity(fd_only, ap.x, xj, ap.lambda, ap.mu)));
            // The pairwise sensitivity must also reproduce the full-function one.
            dev_affd = std::max(
                dev_affd, rel_dev(pair_sensitivity(t, ap.x, xj, ap.lambda, ap.mu), exact));
          }
          double f_full = eval_objective(a, b);
          dev_aff = std::max(dev_aff, std::abs(f_sum - f_full) / std::max(1.0, std::abs(f_full)));
          if (a.n_eq) dev_aff = std::max(dev_aff, rel_dev(g_sum, g));
          if (a.n_ineq) dev_aff = std::max(dev_aff, rel_dev(h_sum, h));
        }
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::dimension_mismatch) {
        dev_dim = std::max(dev_dim, 1.0);
        dim_detail = e.what();
      } else {
        eval_ok = false;
        eval_detail = e.what();
      }
    }
  }

  const double tol = opt.derivative_tolerance;
  add("dimensions", dev_dim == 0.0, dev_dim, dim_detail);
  add("evaluation", eval_ok, 0.0, eval_detail);
  add("objective_gradient", dev_fg <= tol, dev_fg, "");
  add("equality_jacobian", dev_gj <= tol, dev_gj, "");
  add("inequality_jacobian", dev_hj <= tol, dev_hj, "");
  add("lagrangian_hessian", dev_hess <= 10 * tol, dev_hess, "");
  if (nlp.affine_form) {
    std::ostringstream os;
    os << "max deviation " << dev_aff;
    add("affine_equivalence", dev_aff <= opt.affine_tolerance, dev_aff, os.str());
    add("affine_sensitivity", dev_affd <= tol, dev_affd, "");
  }
  return report;
}

}  // namespace sbdp
