#pragma once

#include <ostream>
#include <string>

#include "sbdp/analysis.hpp"
#include "sbdp/coordinator.hpp"
#include "sbdp/ocp.hpp"

namespace sbdp {

/// Shortest round-trip text ("%.17g"); empty for NaN so CSV cells stay blank.
std::string format_number(double v);

/// Columns q, step_norm, kkt_residual, error, rate, floats_sent.
void write_trace_csv(std::ostream& os, const IterationTrace& trace);

/// status, iterations, final stacked point, abort details. JSON text.
std::string run_summary_json(const RunResult& result, const std::string& problem,
                             const RunSettings& settings);

std::string certificate_json(const ConvergenceEstimate& estimate, const std::string& problem);

/// Columns T, norm, spectral_radius, converges, order, available, note.
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);

}  // namespace sbdp
