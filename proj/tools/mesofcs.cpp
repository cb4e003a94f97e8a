#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mesofcs/leads.hpp"
#include "mesofcs/runner.hpp"
#include "mesofcs/validation.hpp"

using namespace mesofcs;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kValidationFailed = 1, kConfigError = 2, kRuntimeError = 3 };

struct Options {
  std::string config;
  std::string out;  // empty: working directory for simulate and sweep, no file otherwise
  Index threads = 0;  // 0: take the config value
  Index stride = 0;   // 0: take the config value
  std::string level = "quick";
  std::vector<std::string> criteria;
  std::vector<Index> modes{50, 100, 200, 400};
};

void print_summary(const RunResult& r) {
  std::printf("t = [%g, %g], %ld steps, tau = %.6g\n", r.summary.t_start, r.summary.t_end,
              static_cast<long>(r.summary.steps), r.summary.tau);
  if (r.summary.limit_cycle)
    std::printf("limit cycle from t1 = %.4f (residual %.3e)\n", r.summary.limit_cycle->start,
                r.summary.limit_cycle->residual);
  for (const auto& w : r.summary.windows) {
    if (!w.complete) {
      std::printf("window t1 = %g: %s\n", w.t1, w.note.c_str());
      continue;
    }
    std::printf("window t1 = %g: charge balance %.3e\n", w.t1, w.charge_balance);
    for (const auto& res : w.reservoirs) {
      std::printf("  %-8s J_bar % .8e", res.label.c_str(), res.j_bar);
      if (res.probe)
        std::printf("  S0 %.8e  S_inf %.8e%s", res.s0, res.s_inf.last_period,
                    res.s_inf.converged ? "" : " (not converged)");
      if (res.fano) std::printf("  F %.6f", *res.fano);
      std::printf("\n");
    }
  }
  const Diagnostics& d = r.trace.diagnostics;
  if (d.checks > 0)
    std::printf("invariants: %ld checks, herm %.2e, anti %.2e, eig [%.3e, %.12f]\n",
                static_cast<long>(d.checks), d.hermiticity, d.anti_hermiticity, d.min_eigenvalue,
                d.max_eigenvalue);
}

int cmd_simulate(const Options& o) {
  RunConfig config = load_run_config(o.config);
  if (o.stride > 0) config.output.stride = o.stride;
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(dir);
  const RunResult r = simulate(config, dir);
  print_summary(r);
  return kOk;
}

int cmd_sweep(const Options& o) {
  const SweepConfig sweep = load_sweep_config(o.config);
  SweepConfig s = sweep;
  if (o.stride > 0) s.base["output"]["stride"] = o.stride;
  const Index threads = o.threads > 0 ? o.threads : s.threads;
  const auto rows = run_sweep(s, threads);
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(dir);
  const fs::path table = dir / s.table;
  std::ofstream out(table);
  if (!out) throw Error("cannot write " + table.string());
  write_sweep_table(out, s, rows);
  std::size_t failed = 0;
  for (const auto& row : rows) failed += row.status != "ok";
  std::printf("%zu points, %zu failed -> %s\n", rows.size(), failed, table.string().c_str());
  return kOk;
}

int cmd_validate(const Options& o) {
  ValidationOptions vo;
  vo.threads = o.threads > 0 ? o.threads : 1;
  ValidationReport report;
  if (!o.criteria.empty()) {
    for (const auto& c : o.criteria) {
      const std::string id = c.find('-') == std::string::npos ? "criterion-" + c : c;
      report.results.push_back(run_check(id, vo));
      std::printf("%s\n", format_line(report.results.back()).c_str());
    }
  } else {
    const ValidationLevel level =
        o.level == "full" ? ValidationLevel::full : ValidationLevel::quick;
    for (const auto& id : checks_for(level)) {
      report.results.push_back(run_check(id, vo));
      std::printf("%s\n", format_line(report.results.back()).c_str());
      std::fflush(stdout);
    }
  }
  std::printf("%s\n", report.passed() ? "all checks passed" : "some checks FAILED");
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream(fs::path(o.out) / "validation.json") << report.to_json().dump(2) << '\n';
  }
  return report.passed() ? kOk : kValidationFailed;
}

int cmd_leads_check(const Options& o) {
  std::vector<ReservoirSpec> reservoirs;
  if (!o.config.empty()) {
    reservoirs = load_run_config(o.config).reservoirs;
  } else {
    reservoirs.push_back({"L", 0.1, 24.0, 0, FlatBand{0.5, 100.0}, 400});
  }
  std::string csv = "label,modes,max_relative_deviation,relative\n";
  for (const auto& r : reservoirs) {
    std::printf("%s\n", r.label.c_str());
    for (const auto& row : convergence_report(r, o.modes)) {
      std::printf("  N = %5ld  deviation %.6f%s\n", static_cast<long>(row.modes),
                  row.max_relative_deviation, row.relative ? "" : " (absolute)");
      csv += r.label + "," + std::to_string(row.modes) + "," +
             format_shortest(row.max_relative_deviation) + "," + (row.relative ? "1" : "0") + "\n";
    }
  }
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream(fs::path(o.out) / "leads.csv") << csv;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-resolved currents and noise of driven quadratic conductors"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "run one configuration");
  sim->add_option("--config", o.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", o.out, "output directory");
  sim->add_option("--stride", o.stride, "store every k-th step")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("--config", o.config, "sweep configuration (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", o.out, "output directory");
  sweep->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--stride", o.stride, "store every k-th step")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "run the validation suite");
  val->add_option("--level", o.level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  val->add_option("--criterion", o.criteria, "run only these checks (1-13 or check ids)");
  val->add_option("--out", o.out, "directory for validation.json");
  val->add_option("--threads", o.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);

  auto* leads = app.add_subcommand("leads-check", "mesoscopic-lead discretization error");
  leads->add_option("--config", o.config, "run configuration; default is the reference L lead")
      ->check(CLI::ExistingFile);
  leads->add_option("--modes", o.modes, "mode counts")->delimiter(',');
  leads->add_option("--out", o.out, "directory for leads.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*sweep) return cmd_sweep(o);
    if (*val) return cmd_validate(o);
    return cmd_leads_check(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
}
