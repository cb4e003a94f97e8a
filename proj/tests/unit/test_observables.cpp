#include <doctest.h>

#include <cmath>
#include <vector>

#include "mesofcs/observables.hpp"

using namespace mesofcs;

namespace {

struct Sampled {
  std::vector<double> t, v;
  Series series() const { return {t, v}; }
};

template <typename F>
Sampled sample_fn(F f, double t0, double t1, double dt) {
  Sampled s;
  const auto n = static_cast<std::size_t>(std::llround((t1 - t0) / dt));
  for (std::size_t i = 0; i <= n; ++i) {
    s.t.push_back(t0 + static_cast<double>(i) * dt);
    s.v.push_back(f(s.t.back()));
  }
  return s;
}

}  // namespace

TEST_CASE("trapezoid integration") {
  const Sampled lin = sample_fn([](double t) { return 2.0 * t + 1.0; }, 0.0, 2.0, 0.1);
  CHECK(integrate(lin.series(), 0.0, 2.0) == doctest::Approx(6.0));
  CHECK(integrate(lin.series(), 0.25, 1.35) == doctest::Approx(1.35 * 1.35 + 1.35 - 0.3125));
  CHECK(integrated_charge(lin.series(), 0.0, 1.0) + integrated_charge(lin.series(), 1.0, 2.0) ==
        doctest::Approx(6.0));
  CHECK_THROWS_AS(integrate(lin.series(), 0.0, 3.0), ValidationError);
  CHECK(sample(lin.series(), 0.55) == doctest::Approx(2.1));
}

TEST_CASE("limit cycle of a relaxing oscillation") {
  const double tau = 2.0 * kPi / 5.0;
  const Sampled s = sample_fn([](double t) { return std::cos(5.0 * t) + std::exp(-t); }, 0.0, 30.0, 0.01);
  const LimitCycle lc = detect_limit_cycle(s.series(), tau, 1e-4);
  // max |J(t + tau) - J(t)| = e^{-t} (1 - e^{-tau})
  const double expected = std::log((1.0 - std::exp(-tau)) / 1e-4);
  CHECK(lc.start == doctest::Approx(expected).epsilon(0.002));
  CHECK(lc.residual <= 1e-4);
  CHECK(periodicity_residual(s.series(), 20.0, tau) < 1e-8);
  CHECK_THROWS_AS(detect_limit_cycle(s.series(), tau, 1e-15), NotConvergedError);
}

TEST_CASE("period averages") {
  const double tau = 2.0 * kPi / 5.0;
  const Sampled j = sample_fn([](double t) { return 0.3 + std::sin(5.0 * t); }, 0.0, 10.0, 0.01);
  CHECK(lc_average_current(j.series(), 2.0, tau) == doctest::Approx(0.3).epsilon(1e-4));

  // D(t, t1) = S (1 - e^{-(t - t1)}) + periodic part
  const double t1 = 1.0;
  const Sampled d = sample_fn(
      [&](double t) { return 0.2 * (1.0 - std::exp(-(t - t1))) + 0.05 * std::cos(5.0 * t); }, t1,
      t1 + 25.0 * tau, 0.01);
  const ZeroFrequencyNoise z = zero_frequency_noise(d.series(), t1, tau);
  CHECK(z.periods == 25);
  CHECK(z.last_period == doctest::Approx(0.2).epsilon(1e-4));
  CHECK(z.converged);
  CHECK(z.total_average < z.last_period);
  CHECK(single_period_noise(d.series(), t1, tau) < 0.2 * 0.5);
  CHECK(charge_variance(d.series(), t1, t1 + 1.0) == doctest::Approx(integrate(d.series(), t1, t1 + 1.0)));
}

TEST_CASE("variance decomposition") {
  const Sampled w0 = sample_fn([](double t) { return 1.0 + 0.0 * t; }, 0.0, 4.0, 0.01);
  const Sampled w1 = sample_fn([](double t) { return 0.5 + 0.0 * t; }, 2.0, 4.0, 0.01);
  const VarianceDecomposition d = decompose_variance(w0.series(), w1.series(), 0.0, 2.0, 4.0);
  CHECK(d.total == doctest::Approx(4.0));
  CHECK(d.late == doctest::Approx(1.0));
  CHECK(d.early == doctest::Approx(2.0));
  CHECK(covariance_decomposition_residual(d) == doctest::Approx(0.0));
}

TEST_CASE("Fano factor") {
  CHECK(fano_factor(0.05, -0.1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(fano_factor(0.05, 0.0), ValidationError);
}
