#include <doctest.h>

#include <cmath>

#include "mesofcs/dynamics.hpp"
#include "mesofcs/leads.hpp"
#include "mesofcs/oracle.hpp"

using namespace mesofcs;

namespace {

AssembledModel three_mode(DriveWaveform drive) {
  SystemSpec sys;
  sys.static_hamiltonian = CMatrix::Constant(1, 1, 0.3);
  sys.drive = std::move(drive);
  sys.drive_signs = {1};
  ReservoirSpec l{"L", 0.5, 2.0, 0, FlatBand{1.0, 1.0}, 2};
  ReservoirSpec r{"R", 0.5, -2.0, 0, FlatBand{1.0, 1.0}, 2};
  auto one = [](double x) { return RVector::Constant(1, x); };
  return assemble(sys, {explicit_lead(l, one(0.4), one(1.0), one(0.8)),
                        explicit_lead(r, one(-0.2), one(0.8), one(0.5))});
}

}  // namespace

TEST_CASE("Fock space operators") {
  const FockSpace f(3);
  CHECK(f.dimension() == 8);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) {
      const RMatrix anti = RMatrix(f.annihilator(i) * f.creator(j)) + RMatrix(f.creator(j) * f.annihilator(i));
      const RMatrix expected = RMatrix::Identity(8, 8) * (i == j ? 1.0 : 0.0);
      CHECK(max_abs(anti - expected) < 1e-15);
    }
}

TEST_CASE("Gaussian states round-trip through the Fock space") {
  const AssembledModel m = three_mode(DriveWaveform::constant(0.0));
  const FockSpaceModel fm(m);
  CMatrix c = initial_covariance(m, InitialCovariance::leads_thermal);
  c(0, 0) = 0.4;
  const CMatrix rho = fm.state_from_covariance(c);
  CHECK(rho.trace().real() == doctest::Approx(1.0));
  CHECK(max_abs(fm.covariance(rho) - c) < 1e-14);
}

TEST_CASE("tilted generator") {
  const AssembledModel m = three_mode(DriveWaveform::cosine(1.5, 2.0));
  const FockSpaceModel fm(m);
  const CMatrix rho = fm.state_from_covariance(initial_covariance(m, InitialCovariance::leads_thermal));
  const TiltedGenerator l0(fm, 0.0, 0);
  CHECK(std::abs(l0.apply(0.4, rho).trace()) < 1e-14);  // trace preserving at chi = 0

  const TiltedGenerator lc(fm, 0.3, 0);
  const CMatrix super = lc.superoperator(0.4);
  const CMatrix applied = lc.apply(0.4, rho);
  const CVector vec = super * Eigen::Map<const CVector>(rho.data(), rho.size());
  CHECK(max_abs(Eigen::Map<const CVector>(applied.data(), applied.size()) - vec) < 1e-13);
}

TEST_CASE("characteristic function and distribution") {
  const AssembledModel m = three_mode(DriveWaveform::cosine(1.5, 2.0));
  const FockSpaceModel fm(m);
  const CMatrix rho = fm.state_from_covariance(initial_covariance(m, InitialCovariance::leads_thermal));
  CHECK(std::abs(characteristic_function(fm, 0, rho, 0.0, 2.0, 0.0, 0.01) - 1.0) < 1e-12);
  const Complex g = characteristic_function(fm, 0, rho, 0.0, 2.0, 0.7, 0.01);
  CHECK(std::abs(g) <= 1.0 + 1e-12);

  DistributionOptions o;
  o.points = 32;
  const Distribution p = distribution(
      [&](double chi) { return characteristic_function(fm, 0, rho, 0.0, 2.0, chi, 0.01); }, o);
  CHECK(p.total() == doctest::Approx(1.0).epsilon(1e-10));
  for (double x : p.probabilities) CHECK(x > -1e-10);
}

TEST_CASE("Fourier inversion of a known distribution") {
  // Poisson-binomial of two independent transfers with p = 0.2 and 0.6
  auto cf = [](double chi) {
    return (0.8 + 0.2 * std::exp(kI * chi)) * (0.4 + 0.6 * std::exp(kI * chi));
  };
  DistributionOptions o;
  o.points = 16;
  const Distribution d = distribution(cf, o);
  CHECK(d.mean() == doctest::Approx(0.8));
  CHECK(d.variance() == doctest::Approx(0.16 + 0.24));
  const double h = 1e-3;
  const Cumulants c = cumulants_from_cf({cf(-2 * h), cf(-h), cf(0.0), cf(h), cf(2 * h)}, h);
  CHECK(c.mean.real() == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(c.variance.real() == doctest::Approx(0.4).epsilon(1e-8));
  CHECK_THROWS_AS(distribution([](double) { return Complex(0.9); }, o), ValidationError);
}

TEST_CASE("oracle paths agree at a small step") {
  const AssembledModel m = three_mode(DriveWaveform::pulse(2.0, 1.0, 0.5));
  const FockSpaceModel fm(m);
  const CMatrix rho = fm.state_from_covariance(initial_covariance(m, InitialCovariance::leads_thermal));
  const CumulantSeries a = cf_cumulant_path(fm, 1, rho, 0.0, 2.0);
  const CumulantSeries b = sigma_cumulant_path(fm, 1, rho, 0.0, 2.0);
  REQUIRE(a.times.size() == b.times.size());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    CHECK(a.current[i] == doctest::Approx(b.current[i]).epsilon(1e-9));
    CHECK(std::abs(a.noise[i] - b.noise[i]) < 1e-7);
  }
}
