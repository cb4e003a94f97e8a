#include <doctest.h>

#include <filesystem>
#include <algorithm>
#include <fstream>
#include <sstream>

#include "mesofcs/runner.hpp"

using namespace mesofcs;

namespace {

RunConfig small_run(double amplitude = 8.0, double bias = 6.0) {
  RunConfig c;
  c.system.drive = DriveWaveform::cosine(amplitude, 5.0);
  c.system.drive_signs = {1, -1};
  c.reservoirs.push_back({"L", 0.2, bias, 0, FlatBand{0.5, 20.0}, 20});
  c.reservoirs.push_back({"R", 0.2, -bias, 1, FlatBand{0.5, 20.0}, 20});
  c.integration.initial = InitialCovariance::half_filled;
  c.counting.periods = 10;
  return c;
}

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("auto windows open on the limit cycle") {
  const RunResult r = run(small_run());
  REQUIRE(r.summary.limit_cycle);
  const WindowSummary& w = r.summary.windows.front();
  REQUIRE(w.complete);
  CHECK(w.t1 >= r.summary.limit_cycle->start);
  CHECK(*w.periodicity_residual <= 1e-4);
  CHECK(std::abs(w.charge_balance) < 1e-4);
  CHECK(w.reservoirs[0].s_inf.periods == 10);
  CHECK(r.summary.t_end == doctest::Approx(w.t1 + 10 * r.summary.tau).epsilon(1e-3));
}

TEST_CASE("zero bias and zero drive carry no current") {
  RunConfig c = small_run(0.0, 0.0);
  c.system.drive = DriveWaveform::constant(0.0);
  c.counting.auto_windows = false;
  c.counting.windows = {5.0};
  c.counting.period = 1.0;
  c.counting.periods = 5;
  const RunResult r = run(c);
  CHECK(std::abs(r.summary.windows.front().reservoirs[0].j_bar) < 1e-10);
  CHECK_FALSE(r.summary.windows.front().reservoirs[0].fano);
}

TEST_CASE("outputs are deterministic") {
  namespace fs = std::filesystem;
  const fs::path a = fs::temp_directory_path() / "mesofcs_run_a";
  const fs::path b = fs::temp_directory_path() / "mesofcs_run_b";
  RunConfig c = small_run();
  c.output.stride = 5;
  c.output.negate = {"R"};
  simulate(c, a);
  simulate(c, b);
  const std::string csv = read(a / "trace.csv");
  CHECK(csv == read(b / "trace.csv"));
  CHECK(read(a / "summary.json") == read(b / "summary.json"));
  CHECK(csv.rfind("t,J_L,J_R,D_L@", 0) == 0);
  CHECK(csv.find(",-J_R\n") != std::string::npos);

  const Json summary = Json::parse(read(a / "summary.json"));
  CHECK(summary.contains("config"));
  CHECK(to_json(parse_run_config(summary["config"])) == to_json(c));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("checkpoint restart continues the trajectory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mesofcs_ckpt";
  RunConfig first = small_run();
  first.counting.auto_windows = false;
  first.counting.windows.clear();
  first.integration.t_max = 2.0;
  first.integration.checkpoint_out = "state.ckpt";
  simulate(first, dir);

  RunConfig second = first;
  second.integration.checkpoint_out.clear();
  second.integration.checkpoint_in = (dir / "state.ckpt").string();
  second.integration.t_max = 4.0;
  const RunResult resumed = run(second);

  RunConfig whole = first;
  whole.integration.checkpoint_out.clear();
  whole.integration.t_max = 4.0;
  const RunResult direct = run(whole);
  CHECK(resumed.summary.t_start == doctest::Approx(2.0));
  CHECK(max_abs(resumed.final_covariance - direct.final_covariance) < 1e-13);
  fs::remove_all(dir);
}

TEST_CASE("parallel sweep equals serial sweep") {
  SweepConfig s;
  s.base = to_json(small_run());
  s.parameters = {"system.drive.amplitude"};
  s.values = {0.0, 4.0, 8.0, -1.0};
  s.base["reservoirs"][0]["modes"] = 20;
  const auto serial = run_sweep(s, 1);
  const auto parallel = run_sweep(s, 3);
  std::ostringstream a, b;
  write_sweep_table(a, s, serial);
  write_sweep_table(b, s, parallel);
  CHECK(a.str() == b.str());
  CHECK(serial[1].status == "ok");

  s.values.clear();
  std::ostringstream empty;
  write_sweep_table(empty, s, run_sweep(s, 2));
  const std::string table = empty.str();
  CHECK(std::count(table.begin(), table.end(), '\n') == 1);
}
