#include <doctest.h>

#include "mesofcs/leads.hpp"
#include "mesofcs/model.hpp"

using namespace mesofcs;

namespace {

AssembledModel small_model(Index modes = 4) {
  ReservoirSpec l{"L", 0.5, 1.0, 0, FlatBand{0.5, 5.0}, modes};
  ReservoirSpec r{"R", 0.5, -1.0, 1, FlatBand{0.5, 5.0}, modes};
  return assemble(SystemSpec::two_site(1.0, DriveWaveform::cosine(2.0, 1.5)),
                  {discretize(l), discretize(r)});
}

}  // namespace

TEST_CASE("fermi occupation") {
  CHECK(fermi_occupation(0.0, 0.1, 0.0) == doctest::Approx(0.5));
  CHECK(fermi_occupation(1e6, 0.1, 0.0) == 0.0);
  CHECK(fermi_occupation(-1e6, 0.1, 0.0) == 1.0);
  CHECK(fermi_occupation(0.3, 0.2, 0.1) == doctest::Approx(1.0 / (std::exp(1.0) + 1.0)));
}

TEST_CASE("drive waveforms") {
  const auto c = DriveWaveform::cosine(40.0, 5.0);
  CHECK(c(0.0) == doctest::Approx(40.0));
  CHECK(c(kPi / 5.0) == doctest::Approx(-40.0));
  REQUIRE(c.period());
  CHECK(*c.period() == doctest::Approx(2.0 * kPi / 5.0));
  CHECK_FALSE(DriveWaveform::constant(3.0).period());
  CHECK(DriveWaveform::pulse(2.0, 3.0, 1.0)(3.0) == doctest::Approx(2.0));

  const auto tab = DriveWaveform::tabulated({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0});
  CHECK(tab(0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(DriveWaveform::tabulated({0.0, 0.0}, {1.0, 2.0}), ConfigError);
}

TEST_CASE("two-site Hamiltonian splits the drive between the sites") {
  const SystemSpec s = SystemSpec::two_site(1.0, DriveWaveform::cosine(40.0, 5.0));
  const CMatrix h = build_system_hamiltonian(s, 0.0);
  CHECK(h(0, 0).real() == doctest::Approx(20.0));
  CHECK(h(1, 1).real() == doctest::Approx(-20.0));
  CHECK(h(0, 1).real() == doctest::Approx(-1.0));
  CHECK(hermiticity_defect(h) == 0.0);
}

TEST_CASE("assembled model layout") {
  const AssembledModel m = small_model();
  CHECK(m.dimension() == 10);
  CHECK(m.reservoir_count() == 2);
  CHECK(m.find_reservoir("R") == 1);
  CHECK(m.reservoir(1).offset == 6);
  CHECK(m.damping().head(2).isZero());
  CHECK(max_abs(m.dense_hamiltonian(0.7) - m.hamiltonian(0.7).dense()) == 0.0);

  const RMatrix g = m.counting_matrix(0);
  CHECK(max_abs(g + g.transpose()) == 0.0);
  CHECK(g.block(0, 2, 1, 4).cwiseAbs().minCoeff() > 0.0);
  CHECK(g.rightCols(4).isZero());
}

TEST_CASE("fingerprint tracks the dynamics") {
  const AssembledModel a = small_model();
  CHECK(a.fingerprint() == small_model().fingerprint());
  CHECK(a.fingerprint() != small_model(6).fingerprint());
}

TEST_CASE("invalid specs are rejected") {
  ReservoirSpec bad{"L", -1.0, 0.0, 0, FlatBand{0.5, 5.0}, 4};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  ReservoirSpec one{"L", 0.5, 0.0, 0, FlatBand{0.5, 5.0}, 1};
  CHECK_THROWS_AS(discretize(one), ConfigError);
  ReservoirSpec off_site{"L", 0.5, 0.0, 5, FlatBand{0.5, 5.0}, 4};
  CHECK_THROWS_AS(assemble(SystemSpec::two_site(1.0, DriveWaveform::constant(0.0)),
                           {discretize(off_site)}),
                  ConfigError);
}
