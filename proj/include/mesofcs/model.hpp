#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mesofcs/arrowhead.hpp"
#include "mesofcs/common.hpp"

namespace mesofcs {

/// Fermi-Dirac occupation 1/(exp((energy-mu)/temperature)+1), saturating
/// to exactly 0 or 1 far from the Fermi level.
double fermi_occupation(double energy, double temperature, double chemical_potential);

/// Time profile E(t) of the applied field, in energy units (the product
/// e*a*E(t)). Evaluation is defined for every t >= 0.
class DriveWaveform {
 public:
  enum class Kind { constant, cosine, pulse, tabulated };

  DriveWaveform() = default;

  static DriveWaveform constant(double value);
  /// amplitude * cos(omega t); omega > 0.
  static DriveWaveform cosine(double amplitude, double omega);
  /// Gaussian pulse amplitude * exp(-(t - center)^2 / (2 width^2)); width > 0.
  static DriveWaveform pulse(double amplitude, double center, double width);
  /// Piecewise-linear through (times, values); held constant outside the table.
  static DriveWaveform tabulated(std::vector<double> times, std::vector<double> values);

  double operator()(double t) const;

  Kind kind() const noexcept { return kind_; }
  double amplitude() const noexcept { return amplitude_; }
  double omega() const noexcept { return omega_; }
  double center() const noexcept { return center_; }
  double width() const noexcept { return width_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// 2 pi / omega for the cosine drive, empty otherwise.
  std::optional<double> period() const;

 private:
  Kind kind_ = Kind::constant;
  double amplitude_ = 0.0;
  double omega_ = 0.0;
  double center_ = 0.0;
  double width_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Quadratic system Hamiltonian h_S(t) = h0 + (E(t)/2) diag(s_1..s_L), or an
/// arbitrary user-supplied builder.
struct SystemSpec {
  CMatrix static_hamiltonian;
  DriveWaveform drive;
  std::vector<int> drive_signs;
  std::function<CMatrix(double)> builder;

  Index sites() const { return static_hamiltonian.rows(); }
  void validate() const;

  /// Two sites with hopping -hopping and antisymmetric drive (+1, -1).
  static SystemSpec two_site(double hopping, DriveWaveform drive);
};

CMatrix build_system_hamiltonian(const SystemSpec& spec, double t);

struct FlatBand {
  double coupling = 0.0;        // Gamma
  double half_bandwidth = 1.0;  // W
};

struct TabulatedBand {
  std::vector<double> energies;  // strictly increasing
  std::vector<double> values;    // J(omega) >= 0
  double half_bandwidth = 1.0;
};

/// Reservoir spectral density J(omega); zero outside [-W, W].
class SpectralDensity {
 public:
  SpectralDensity() = default;
  SpectralDensity(FlatBand band) : band_(band) {}
  SpectralDensity(TabulatedBand band) : band_(std::move(band)) {}

  double operator()(double omega) const;
  double half_bandwidth() const;
  bool is_flat() const { return std::holds_alternative<FlatBand>(band_); }
  const std::variant<FlatBand, TabulatedBand>& band() const { return band_; }
  void validate() const;

 private:
  std::variant<FlatBand, TabulatedBand> band_{FlatBand{}};
};

struct ReservoirSpec {
  std::string label;
  double temperature = 1.0;
  double chemical_potential = 0.0;
  Index site = 0;  // zero-based system mode index
  SpectralDensity spectral_density;
  Index modes = 2;

  void validate() const;
};

struct LeadDiscretization;

struct ModelSpec {
  SystemSpec system;
  std::vector<ReservoirSpec> reservoirs;
};

/// Lead-mode block of one reservoir inside the assembled single-particle space.
struct ReservoirBlock {
  std::string label;
  Index site = 0;
  Index offset = 0;
  Index size = 0;
  RVector coupling;
};

/// Single-particle matrices of system plus all leads. Mode ordering is the
/// system first, then the lead modes of each reservoir in input order.
class AssembledModel {
 public:
  AssembledModel(SystemSpec system, std::vector<LeadDiscretization> leads);

  Index dimension() const { return dimension_; }
  Index system_size() const { return system_.sites(); }
  Index reservoir_count() const { return static_cast<Index>(blocks_.size()); }
  const ReservoirBlock& reservoir(Index id) const;
  Index find_reservoir(const std::string& label) const;
  const std::vector<ReservoirBlock>& reservoirs() const { return blocks_; }
  const std::vector<LeadDiscretization>& leads() const { return leads_; }
  const SystemSpec& system() const { return system_; }

  /// Arrowhead H(t): dense system block, diagonal leads, coupling stripes.
  ArrowheadHamiltonian hamiltonian(double t) const;
  CMatrix dense_hamiltonian(double t) const;
  /// W(t) = i H(t) + gamma / 2.
  CMatrix drift(double t) const;

  /// Diagonal of gamma (zero on the system sector).
  const RVector& damping() const { return damping_; }
  /// Diagonal of F = gamma f.
  const RVector& injection() const { return injection_; }
  /// Lead occupations f_k embedded on the full space (zero on the system).
  RVector thermal_occupations() const;

  /// Dense real antisymmetric G_nu.
  RMatrix counting_matrix(Index reservoir_id) const;

  /// Test hook: flips the sign of G_nu (counting and noise sources) for one
  /// reservoir while leaving H untouched.
  void inject_counting_sign_error(Index reservoir_id);

  /// Stable fingerprint of everything that determines the dynamics.
  std::uint64_t fingerprint() const;

 private:
  SystemSpec system_;
  std::vector<LeadDiscretization> leads_;
  std::vector<ReservoirBlock> blocks_;
  Index dimension_ = 0;
  RVector lead_energy_;
  RVector lead_coupling_;
  std::vector<Index> lead_site_;
  RVector damping_;
  RVector injection_;
};

AssembledModel assemble(const SystemSpec& system, std::vector<LeadDiscretization> leads);
AssembledModel assemble(const ModelSpec& spec);

}  // namespace mesofcs
