#include <doctest.h>

#include "mesofcs/leads.hpp"

using namespace mesofcs;

TEST_CASE("midpoint discretization of a flat band") {
  ReservoirSpec r{"L", 0.1, 24.0, 0, FlatBand{0.5, 100.0}, 400};
  const LeadDiscretization d = discretize(r);
  REQUIRE(d.size() == 400);
  CHECK(d.energies(0) == doctest::Approx(-99.75));
  CHECK(d.energies(399) == doctest::Approx(99.75));
  CHECK(d.damping(17) == doctest::Approx(0.5));
  CHECK(d.coupling(3) == doctest::Approx(std::sqrt(0.5 * 0.5 / (2.0 * kPi))));
  CHECK(d.occupation(0) == doctest::Approx(1.0));
  CHECK(d.occupation(399) == doctest::Approx(0.0));
}

TEST_CASE("effective density approaches the flat band") {
  ReservoirSpec r{"L", 0.1, 0.0, 0, FlatBand{0.5, 100.0}, 400};
  CHECK(effective_spectral_density(discretize(r), 0.0) == doctest::Approx(0.5).epsilon(0.1));

  const auto rows = convergence_report(r, {50, 100, 200, 400});
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].max_relative_deviation < rows[i - 1].max_relative_deviation);
}

TEST_CASE("tabulated band is sampled at the mode energies") {
  ReservoirSpec r{"L", 0.1, 0.0, 0, TabulatedBand{{-10.0, 10.0}, {0.0, 2.0}, 10.0}, 10};
  const LeadDiscretization d = discretize(r);
  CHECK(d.coupling(9) == doctest::Approx(std::sqrt(1.9 * 2.0 / (2.0 * kPi))));
}

TEST_CASE("explicit leads accept a single mode") {
  ReservoirSpec r{"L", 0.5, 2.0, 0, FlatBand{1.0, 1.0}, 2};
  const LeadDiscretization d =
      explicit_lead(r, RVector::Constant(1, 0.4), RVector::Constant(1, 1.0), RVector::Constant(1, 0.7));
  CHECK(d.size() == 1);
  CHECK(d.occupation(0) == doctest::Approx(fermi_occupation(0.4, 0.5, 2.0)));
}
