#include "sbdp/report.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace sbdp {

namespace {

nlohmann::json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

nlohmann::json vector_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(number(v[k]));
  return a;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
  os << "q,step_norm,kkt_residual,error,rate,floats_sent\n";
  for (const IterationRecord& r : trace.records) {
    os << r.q << ',' << format_number(r.step_norm) << ',' << format_number(r.kkt_residual) << ','
       << (r.error ? format_number(*r.error) : "") << ','
       << (r.rate ? format_number(*r.rate) : "") << ',' << r.floats << '\n';
  }
}

std::string run_summary_json(const RunResult& result, const std::string& problem,
                             const RunSettings& settings) {
  nlohmann::json j;
  j["problem"] = problem;
  j["mode"] = to_string(settings.mode);
  j["status"] = to_string(result.status);
  j["iterations"] = result.iterations;
  j["eps"] = settings.eps;
  j["alpha"] = settings.alpha;
  j["parallelism"] = settings.parallelism;
  j["final_point"] = vector_json(result.final_point.stacked());
  if (!result.trace.records.empty()) {
    const IterationRecord& last = result.trace.records.back();
    j["final_step_norm"] = number(last.step_norm);
    j["final_kkt_residual"] = number(last.kkt_residual);
    if (last.error) j["final_error"] = number(*last.error);
  }
  if (result.abort) {
    j["abort"] = {{"agent", result.abort->agent},
                  {"iteration", result.abort->iteration},
                  {"reason", result.abort->reason}};
  }
  return j.dump(2);
}

std::string certificate_json(const ConvergenceEstimate& e, const std::string& problem) {
  nlohmann::json j;
  j["problem"] = problem;
  j["jacobian_norm"] = number(e.jacobian_norm);
  j["unpruned_norm"] = number(e.unpruned_norm);
  j["spectral_radius"] = number(e.spectral_radius);
  j["lipschitz_estimate"] = number(e.lipschitz_estimate);
  j["lipschitz_ball"] = number(e.lipschitz_ball);
  j["lipschitz_stable"] = e.lipschitz_stable;
  j["radius"] = number(e.radius);
  j["radius_note"] = "conservative estimate";
  j["order"] = to_string(e.order);
  j["rate"] = number(e.rate);
  j["strict_complementarity_margin"] = number(e.complementarity_margin);
  j["kkt_residual"] = number(e.kkt_residual);
  return j.dump(2);
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  os << "T,norm,spectral_radius,converges,order,available,note\n";
  for (const SweepRow& r : sweep.rows) {
    os << format_number(r.T) << ',';
    if (r.available)
      os << format_number(r.norm) << ',' << format_number(r.spectral_radius) << ','
         << (r.converges ? "true" : "false") << ',' << to_string(r.order);
    else
      os << ",,,";
    os << ',' << (r.available ? "true" : "false") << ',' << csv_cell(r.note) << '\n';
  }
}

}  // namespace sbdp
