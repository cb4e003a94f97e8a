#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mesofcs/config.hpp"
#include "mesofcs/observables.hpp"
#include "mesofcs/trace.hpp"

namespace mesofcs {

struct ReservoirSummary {
  std::string label;
  bool probe = false;
  double j_bar = 0.0;
  double s0 = 0.0;               // probes only
  ZeroFrequencyNoise s_inf;      // probes only
  std::optional<double> fano;    // probes with |J_bar| > 1e-12
};

struct WindowSummary {
  double t1 = 0.0;
  bool complete = false;  // trace covers [t1, t1 + tau]
  std::string note;       // why the summary is incomplete
  std::optional<double> periodicity_residual;
  double charge_balance = 0.0;  // sum of J_bar over reservoirs
  std::vector<ReservoirSummary> reservoirs;
};

struct RunSummary {
  double tau = 0.0;
  bool auto_windows = true;
  std::optional<LimitCycle> limit_cycle;  // auto mode
  double lc_tolerance = 0.0;
  std::vector<WindowSummary> windows;
  double t_start = 0.0;
  double t_end = 0.0;
  Index steps = 0;
};

struct RunResult {
  RunTrace trace;
  RunSummary summary;
  CMatrix final_covariance;
};

/// Runs one configuration. Auto mode evolves until every current is
/// tau-periodic to lc_tolerance, opens the counting windows at the next
/// stored sample and continues for counting.periods periods.
RunResult run(const RunConfig& config);

/// Header t, J_<label>..., D_<label>@<t1>..., -J_<label>...; %.17g values;
/// D cells are empty before their window opens.
void write_trace_csv(std::ostream& out, const RunResult& result, const RunConfig& config);

Json summary_json(const RunResult& result, const RunConfig& config);

/// run() plus the CSV, summary and optional checkpoint inside `out_dir`.
RunResult simulate(const RunConfig& config, const std::filesystem::path& out_dir);

struct SweepRow {
  double value = 0.0;
  std::string status = "ok";  // ok, config_error, not_converged, runtime_error
  std::string message;
  std::optional<RunSummary> summary;
};

/// One row per value in input order; points run on `threads` workers and
/// failures stay in their row.
std::vector<SweepRow> run_sweep(const SweepConfig& sweep, Index threads);

void write_sweep_table(std::ostream& out, const SweepConfig& sweep,
                       const std::vector<SweepRow>& rows);

/// Shortest text that reads back as the same double.
std::string format_shortest(double x);

}  // namespace mesofcs
