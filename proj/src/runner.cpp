#include "mesofcs/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "mesofcs/checkpoint.hpp"
#include "mesofcs/leads.hpp"

namespace mesofcs {

std::string format_shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

std::string format_full(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<Index> probe_ids(const RunConfig& config, const AssembledModel& model) {
  std::vector<Index> ids;
  if (config.counting.probes.empty()) {
    for (Index r = 0; r < model.reservoir_count(); ++r) ids.push_back(r);
  } else {
    for (const auto& label : config.counting.probes) ids.push_back(model.find_reservoir(label));
  }
  return ids;
}

// Steps needed to cover `span`, rounded up to whole strides.
Index covering_steps(double span, double dt, Index stride) {
  Index k = static_cast<Index>(std::ceil(span / dt - 1e-9));
  if (k % stride != 0) k += stride - k % stride;
  return k;
}

WindowSummary summarize_window(const RunTrace& trace, double t1, double tau,
                               const std::vector<Index>& probes, const RunConfig& config) {
  WindowSummary w;
  w.t1 = t1;
  const double back = trace.times.back();
  if (t1 + tau > back + 1e-9 * std::max(1.0, back)) {
    w.note = "trace ends before t1 + tau";
    return w;
  }
  w.complete = true;
  double worst = 0.0;
  bool have_residual = t1 + 2.0 * tau <= back + 1e-9 * std::max(1.0, back);

  ZeroFrequencyOptions zopt;
  zopt.min_periods = config.counting.min_periods;
  zopt.tolerance = config.counting.convergence_tolerance;

  for (std::size_t r = 0; r < trace.currents.size(); ++r) {
    const Series j = trace.current(r);
    ReservoirSummary rs;
    rs.label = trace.currents[r].label;
    rs.j_bar = lc_average_current(j, t1, tau);
    w.charge_balance += rs.j_bar;
    if (have_residual) worst = std::max(worst, periodicity_residual(j, t1, tau));
    const Index id = trace.currents[r].reservoir;
    if (std::find(probes.begin(), probes.end(), id) != probes.end()) {
      rs.probe = true;
      const Series d = trace.noise(trace.noise_index(rs.label, t1));
      rs.s0 = single_period_noise(d, t1, tau);
      rs.s_inf = zero_frequency_noise(d, t1, tau, zopt);
      if (std::abs(rs.j_bar) > 1e-12) rs.fano = fano_factor(rs.s_inf.last_period, rs.j_bar);
    }
    w.reservoirs.push_back(std::move(rs));
  }
  if (have_residual) w.periodicity_residual = worst;
  return w;
}

}  // namespace

RunResult run(const RunConfig& config) {
  std::vector<LeadDiscretization> leads;
  for (const auto& r : config.reservoirs) leads.push_back(discretize(r));
  const AssembledModel model = assemble(config.system.spec(), std::move(leads));
  const std::vector<Index> probes = probe_ids(config, model);

  const auto& in = config.integration;
  const double dt = in.dt;
  const Index stride = config.output.stride;
  const double tau = config.period();

  CMatrix c0;
  double t_start = 0.0;
  if (!in.checkpoint_in.empty()) {
    Checkpoint cp = read_checkpoint(in.checkpoint_in, model.fingerprint(), model.dimension());
    c0 = std::move(cp.covariance);
    t_start = cp.time;
  } else {
    c0 = initial_covariance(model, in.initial);
  }

  PropagatorOptions opts;
  opts.dt = dt;
  opts.resymmetrize_every = in.resymmetrize_every;
  opts.mode = in.products;
  Propagator prop(model, std::move(c0), t_start, opts);
  TraceRecorder rec(prop, stride, in.check_every, false, in.strict);

  RunSummary summary;
  summary.tau = tau;
  summary.auto_windows = config.counting.auto_windows;
  summary.lc_tolerance = config.counting.lc_tolerance;
  summary.t_start = t_start;
  std::vector<double> starts;

  const Index cap = in.t_max ? grid_steps(t_start, *in.t_max, dt, "integration.t_max")
                             : std::numeric_limits<Index>::max();
  auto limit_reached = [&](Index k) { return k >= cap; };

  if (config.counting.auto_windows) {
    const Index per_period = std::max<Index>(1, static_cast<Index>(std::ceil(tau / dt)));
    const Index max_steps =
        covering_steps(static_cast<double>(config.counting.max_lc_periods) * tau, dt, stride);
    double best = std::numeric_limits<double>::infinity();
    Index k = 0;
    for (;;) {
      if (k >= max_steps || limit_reached(k)) {
        throw NotConvergedError("limit cycle not reached by t = " + std::to_string(prop.time()),
                                best);
      }
      rec.advance();
      ++k;
      if (k % per_period != 0 || prop.time() - t_start < 3.0 * tau) continue;
      LimitCycle lc;
      bool found = true;
      double worst = 0.0;
      for (std::size_t r = 0; r < rec.trace().currents.size(); ++r) {
        try {
          const LimitCycle c =
              detect_limit_cycle(rec.trace().current(r), tau, config.counting.lc_tolerance);
          if (c.start >= lc.start) lc = c;
          worst = std::max(worst, c.residual);
        } catch (const NotConvergedError& e) {
          found = false;
          best = std::min(best, e.residual());
          break;
        }
      }
      if (found) {
        lc.residual = worst;
        summary.limit_cycle = lc;
        break;
      }
    }
    while (k % stride != 0) {
      rec.advance();
      ++k;
    }
    starts.push_back(prop.time());
    rec.open_windows(probes);
    const Index horizon =
        covering_steps(static_cast<double>(config.counting.periods) * tau, dt, stride);
    for (Index h = 0; h < horizon; ++h) {
      if (limit_reached(k)) break;
      rec.advance();
      ++k;
    }
  } else {
    std::vector<std::pair<Index, double>> opens;
    for (double t1 : config.counting.windows) {
      if (t1 < t_start - 1e-12) {
        throw ConfigError("counting.windows: start " + format_shortest(t1) +
                          " precedes the initial time " + format_shortest(t_start));
      }
      const Index k1 = grid_steps(t_start, t1, dt, "counting window start");
      if (k1 % stride != 0) {
        throw ConfigError("counting.windows: start " + format_shortest(t1) +
                          " is not a multiple of the output stride");
      }
      opens.emplace_back(k1, t1);
    }
    std::sort(opens.begin(), opens.end());
    const Index total =
        in.t_max ? cap
                 : opens.back().first +
                       covering_steps(static_cast<double>(config.counting.periods) * tau, dt, stride);
    std::size_t next = 0;
    for (Index k = 0;; ++k) {
      while (next < opens.size() && opens[next].first == k) {
        if (starts.empty() || std::abs(starts.back() - prop.time()) > 1e-12) {
          starts.push_back(prop.time());
          rec.open_windows(probes);
        }
        ++next;
      }
      if (k >= total) break;
      rec.advance();
    }
    if (next < opens.size()) {
      throw ConfigError("counting.windows: start " + format_shortest(opens[next].second) +
                        " lies beyond integration.t_max");
    }
  }
  rec.finish();

  RunResult result;
  result.trace = rec.take();
  result.final_covariance = prop.covariance();
  summary.t_end = prop.time();
  summary.steps = prop.steps_taken();
  for (double t1 : starts)
    summary.windows.push_back(summarize_window(result.trace, t1, tau, probes, config));
  result.summary = std::move(summary);
  return result;
}

void write_trace_csv(std::ostream& out, const RunResult& result, const RunConfig& config) {
  const RunTrace& tr = result.trace;
  std::vector<std::size_t> negated;
  for (const auto& label : config.output.negate) negated.push_back(tr.current_index(label));

  out << "t";
  for (const auto& c : tr.currents) out << ",J_" << c.label;
  for (const auto& n : tr.noises) out << ",D_" << n.label << "@" << format_shortest(n.start);
  for (std::size_t i : negated) out << ",-J_" << tr.currents[i].label;
  out << '\n';

  std::string line;
  for (std::size_t s = 0; s < tr.times.size(); ++s) {
    line = format_full(tr.times[s]);
    for (const auto& c : tr.currents) {
      line += ',';
      line += format_full(c.values[s]);
    }
    for (const auto& n : tr.noises) {
      line += ',';
      if (s >= n.first_sample) line += format_full(n.values[s - n.first_sample]);
    }
    for (std::size_t i : negated) {
      line += ',';
      line += format_full(-tr.currents[i].values[s]);
    }
    line += '\n';
    out << line;
  }
}

namespace {

std::string hex64(std::uint64_t x) {
  std::ostringstream s;
  s << "0x" << std::hex << std::setw(16) << std::setfill('0') << x;
  return s.str();
}

Json number_or_null(std::optional<double> x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

Json window_json(const WindowSummary& w) {
  Json out = {{"t1", w.t1},
              {"complete", w.complete},
              {"charge_balance", w.complete ? Json(w.charge_balance) : Json(nullptr)},
              {"periodicity_residual", number_or_null(w.periodicity_residual)}};
  if (!w.note.empty()) out["note"] = w.note;
  Json res = Json::object();
  for (const auto& r : w.reservoirs) {
    Json e = {{"J_bar", r.j_bar}, {"probe", r.probe}};
    if (r.probe) {
      e["S0"] = r.s0;
      e["S_inf"] = r.s_inf.last_period;
      e["S_inf_total"] = r.s_inf.total_average;
      e["S_inf_relative_difference"] = r.s_inf.relative_difference;
      e["S_inf_periods"] = r.s_inf.periods;
      e["S_inf_converged"] = r.s_inf.converged;
      e["S_inf_period_averages"] = r.s_inf.period_averages;
      e["fano"] = number_or_null(r.fano);
    }
    res[r.label] = e;
  }
  out["reservoirs"] = res;
  return out;
}

}  // namespace

Json summary_json(const RunResult& result, const RunConfig& config) {
  const RunSummary& s = result.summary;
  const Diagnostics& d = result.trace.diagnostics;
  Json out;
  out["version"] = kVersion;
  out["model_hash"] = hex64(result.trace.model_hash);
  out["tau"] = s.tau;
  out["t_start"] = s.t_start;
  out["t_end"] = s.t_end;
  out["steps"] = s.steps;

  Json lc = {{"mode", s.auto_windows ? "auto" : "explicit"}, {"tolerance", s.lc_tolerance}};
  if (s.limit_cycle) {
    lc["detected_start"] = s.limit_cycle->start;
    lc["residual"] = s.limit_cycle->residual;
  }
  out["limit_cycle"] = lc;

  Json windows = Json::array();
  for (const auto& w : s.windows) windows.push_back(window_json(w));
  out["windows"] = windows;

  // The first complete window, flattened for quick lookups.
  bool all_converged = true;
  Json jbar = Json::object(), s0 = Json::object(), sinf = Json::object(),
       sinf_total = Json::object(), fano = Json::object();
  out["t1"] = nullptr;
  for (const auto& w : s.windows) {
    if (!w.complete) continue;
    out["t1"] = w.t1;
    for (const auto& r : w.reservoirs) {
      jbar[r.label] = r.j_bar;
      if (!r.probe) continue;
      s0[r.label] = r.s0;
      sinf[r.label] = r.s_inf.last_period;
      sinf_total[r.label] = r.s_inf.total_average;
      fano[r.label] = number_or_null(r.fano);
      all_converged = all_converged && r.s_inf.converged;
    }
    out["residuals"] = {{"periodicity", number_or_null(w.periodicity_residual)},
                        {"charge_balance", w.charge_balance}};
    break;
  }
  out["J_bar"] = jbar;
  out["S0"] = s0;
  out["S_inf"] = sinf;
  out["S_inf_total"] = sinf_total;
  out["fano"] = fano;

  out["flags"] = {{"limit_cycle_detected", s.limit_cycle.has_value()},
                  {"s_inf_converged", all_converged && !s.windows.empty()},
                  {"invariants_ok", d.within_bounds() && d.imaginary_residue <= 1e-10}};
  out["diagnostics"] = {{"checks", d.checks},
                        {"hermiticity", d.hermiticity},
                        {"anti_hermiticity", d.anti_hermiticity},
                        {"min_eigenvalue", d.min_eigenvalue},
                        {"max_eigenvalue", d.max_eigenvalue},
                        {"imaginary_residue", d.imaginary_residue},
                        {"resymmetrization", d.resymmetrization},
                        {"resymmetrizations", d.resymmetrizations}};
  out["config"] = to_json(config);
  return out;
}

RunResult simulate(const RunConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RunResult result = run(config);

  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : out_dir / path;
  };
  {
    std::ofstream csv(resolve(config.output.csv));
    if (!csv) throw Error("cannot write " + resolve(config.output.csv).string());
    write_trace_csv(csv, result, config);
  }
  {
    std::ofstream js(resolve(config.output.summary));
    if (!js) throw Error("cannot write " + resolve(config.output.summary).string());
    js << summary_json(result, config).dump(2) << '\n';
  }
  if (!config.integration.checkpoint_out.empty()) {
    write_checkpoint(resolve(config.integration.checkpoint_out),
                     {result.trace.model_hash, result.summary.t_end, result.final_covariance});
  }
  return result;
}

std::vector<SweepRow> run_sweep(const SweepConfig& sweep, Index threads) {
  std::vector<SweepRow> rows(sweep.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      SweepRow& row = rows[i];
      row.value = sweep.values[i];
      try {
        const RunConfig config = parse_run_config(apply_sweep_value(sweep, row.value));
        row.summary = run(config).summary;
      } catch (const ConfigError& e) {
        row.status = "config_error";
        row.message = e.what();
      } catch (const NotConvergedError& e) {
        row.status = "not_converged";
        row.message = e.what();
      } catch (const std::exception& e) {
        row.status = "runtime_error";
        row.message = e.what();
      }
    }
  };
  const Index n = std::max<Index>(1, std::min<Index>(threads, static_cast<Index>(rows.size())));
  std::vector<std::thread> pool;
  for (Index t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else if (ch == '\n') out += ' ';
    else out += ch;
  }
  return out + "\"";
}

}  // namespace

void write_sweep_table(std::ostream& out, const SweepConfig& sweep,
                       const std::vector<SweepRow>& rows) {
  std::vector<std::string> labels;
  for (const auto& r : sweep.base.at("reservoirs")) labels.push_back(r.at("label").get<std::string>());

  out << "value,status,t1,tau";
  for (const auto& l : labels)
    out << ",J_bar_" << l << ",S0_" << l << ",S_inf_" << l << ",S_inf_total_" << l << ",fano_" << l;
  out << ",message\n";

  for (const auto& row : rows) {
    out << format_full(row.value) << ',' << row.status;
    const WindowSummary* w = nullptr;
    if (row.summary) {
      for (const auto& cand : row.summary->windows)
        if (cand.complete) {
          w = &cand;
          break;
        }
    }
    if (w != nullptr) out << ',' << format_full(w->t1) << ',' << format_full(row.summary->tau);
    else out << ",,";
    for (const auto& l : labels) {
      const ReservoirSummary* r = nullptr;
      if (w != nullptr)
        for (const auto& cand : w->reservoirs)
          if (cand.label == l) r = &cand;
      if (r == nullptr) {
        out << ",,,,,";
        continue;
      }
      out << ',' << format_full(r->j_bar);
      if (r->probe) {
        out << ',' << format_full(r->s0) << ',' << format_full(r->s_inf.last_period) << ','
            << format_full(r->s_inf.total_average) << ',';
        if (r->fano) out << format_full(*r->fano);
      } else {
        out << ",,,,";
      }
    }
    out << ',' << (row.message.empty() ? "" : csv_quote(row.message)) << '\n';
  }
}

}  // namespace mesofcs
