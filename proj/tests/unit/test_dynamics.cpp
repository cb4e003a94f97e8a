#include <doctest.h>

#include "mesofcs/dynamics.hpp"
#include "mesofcs/leads.hpp"
#include "mesofcs/observables.hpp"

using namespace mesofcs;

namespace {

AssembledModel driven_model(Index modes) {
  ReservoirSpec l{"L", 0.5, 3.0, 0, FlatBand{0.5, 10.0}, modes};
  ReservoirSpec r{"R", 0.5, -3.0, 1, FlatBand{0.8, 10.0}, modes};
  return assemble(SystemSpec::two_site(1.0, DriveWaveform::cosine(4.0, 2.0)),
                  {discretize(l), discretize(r)});
}

}  // namespace

TEST_CASE("structured products match dense products") {
  const AssembledModel m = driven_model(6);
  CMatrix c = initial_covariance(m, InitialCovariance::half_filled);
  c(0, 3) = Complex(0.1, 0.05);
  c(3, 0) = std::conj(c(0, 3));
  CHECK(max_abs(lyapunov_rhs(m, 0.3, c, ProductMode::structured) -
                lyapunov_rhs(m, 0.3, c, ProductMode::dense)) < 1e-12);
  CMatrix aux = CMatrix::Zero(m.dimension(), m.dimension());
  aux(1, 4) = Complex(0.0, 0.2);
  aux(4, 1) = Complex(0.0, 0.2);
  CHECK(max_abs(auxiliary_rhs(m, 0, 0.3, c, aux, ProductMode::structured) -
                auxiliary_rhs(m, 0, 0.3, c, aux, ProductMode::dense)) < 1e-12);

  IntegratorConfig cfg;
  cfg.t_max = 2.0;
  cfg.window_starts = {0.0, 1.0};
  const RunTrace a = evolve(m, c, cfg, {0, 1});
  cfg.mode = ProductMode::dense;
  const RunTrace b = evolve(m, c, cfg, {0, 1});
  for (std::size_t i = 0; i < a.noises.size(); ++i)
    for (std::size_t k = 0; k < a.noises[i].values.size(); ++k)
      CHECK(std::abs(a.noises[i].values[k] - b.noises[i].values[k]) < 1e-12);
  CHECK(std::abs(a.currents[1].values.back() - b.currents[1].values.back()) < 1e-12);
}

TEST_CASE("initial covariances") {
  const AssembledModel m = driven_model(4);
  CHECK(initial_covariance(m, InitialCovariance::empty).isZero());
  const CMatrix t = initial_covariance(m, InitialCovariance::leads_thermal);
  CHECK(t(0, 0) == Complex(0.0));
  CHECK(t(2, 2).real() == doctest::Approx(m.thermal_occupations()(2)));
  const CMatrix h = initial_covariance(m, InitialCovariance::half_filled);
  CHECK(h(1, 1).real() == doctest::Approx(0.5));
}

TEST_CASE("auxiliary source vanishes on pure states of the counted lead") {
  const AssembledModel m = driven_model(4);
  const CMatrix c = initial_covariance(m, InitialCovariance::empty);
  CHECK(auxiliary_source(m, 0, c).isZero());
}

TEST_CASE("RK4 is fourth order") {
  const AssembledModel m = driven_model(4);
  const CMatrix c0 = initial_covariance(m, InitialCovariance::half_filled);
  auto final_current = [&](double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.t_max = 2.0;
    return evolve(m, c0, cfg, {}).currents[0].values.back();
  };
  const double a = final_current(0.005), b = final_current(0.0025), c = final_current(0.00125);
  const double ratio = (a - b) / (b - c);
  CHECK(ratio == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("static drive relaxes to a steady current") {
  ReservoirSpec l{"L", 0.5, 3.0, 0, FlatBand{0.5, 10.0}, 40};
  ReservoirSpec r{"R", 0.5, -3.0, 0, FlatBand{0.5, 10.0}, 40};
  SystemSpec sys;
  sys.static_hamiltonian = CMatrix::Zero(1, 1);
  sys.drive = DriveWaveform::constant(0.0);
  sys.drive_signs = {1};
  const AssembledModel m = assemble(sys, {discretize(l), discretize(r)});
  IntegratorConfig cfg;
  cfg.t_max = 40.0;
  const RunTrace tr = evolve(m, initial_covariance(m, InitialCovariance::empty), cfg, {});
  const double jl = tr.currents[0].values.back(), jr = tr.currents[1].values.back();
  CHECK(jl < 0.0);  // particles leave the high-bias lead
  CHECK(jl + jr == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(tr.diagnostics.within_bounds());
}

TEST_CASE("integration failures and grid checks") {
  CHECK(grid_steps(0.0, 1.0, 0.01, "t") == 100);
  CHECK_THROWS_AS(grid_steps(0.0, 1.005, 0.01, "t"), ConfigError);
  const AssembledModel m = driven_model(4);
  IntegratorConfig cfg;
  cfg.t_max = 1.0;
  cfg.window_starts = {2.0};
  CHECK_THROWS_AS(evolve(m, initial_covariance(m, InitialCovariance::empty), cfg, {0}), ConfigError);
  CMatrix bad = initial_covariance(m, InitialCovariance::empty);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  cfg.window_starts.clear();
  CHECK_THROWS_AS(evolve(m, bad, cfg, {}), Error);
}

TEST_CASE("windows share one trajectory") {
  const AssembledModel m = driven_model(4);
  IntegratorConfig cfg;
  cfg.t_max = 3.0;
  cfg.window_starts = {0.0, 1.5};
  const RunTrace tr = evolve(m, initial_covariance(m, InitialCovariance::half_filled), cfg, {0});
  REQUIRE(tr.noises.size() == 2);
  CHECK(tr.noises[1].first_sample == 150);
  CHECK(tr.noises[1].values.front() == doctest::Approx(0.0));
  CHECK(tr.times.size() == 301);
}
