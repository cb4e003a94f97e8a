#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "mesofcs/common.hpp"
#include "mesofcs/leads.hpp"
#include "mesofcs/model.hpp"

namespace mesofcs {

using SparseReal = Eigen::SparseMatrix<double>;
using SparseComplex = Eigen::SparseMatrix<Complex>;

inline constexpr Index kMaxOracleModes = 10;

/// Fock space of m fermionic modes with Jordan-Wigner signs; basis state s
/// has mode j occupied when bit j of s is set.
class FockSpace {
 public:
  explicit FockSpace(Index modes);

  Index modes() const { return modes_; }
  Index dimension() const { return Index{1} << modes_; }

  const SparseReal& annihilator(Index j) const { return annihilators_.at(static_cast<std::size_t>(j)); }
  SparseReal creator(Index j) const { return annihilator(j).transpose(); }
  /// Diagonal of n_j.
  RVector occupation(Index j) const;

 private:
  Index modes_;
  std::vector<SparseReal> annihilators_;
};

/// Many-body image of an assembled single-particle model.
class FockSpaceModel {
 public:
  explicit FockSpaceModel(const AssembledModel& model);

  const FockSpace& space() const { return space_; }
  const AssembledModel& single_particle() const { return *model_; }
  Index dimension() const { return space_.dimension(); }

  /// H_chi(t) with phases e^{-i chi/2} on c^+ a and e^{+i chi/2} on a^+ c of
  /// reservoir `counted`; chi = 0 gives the physical Hamiltonian.
  SparseComplex hamiltonian(double t, double chi, Index counted) const;
  /// Time-independent part of H_chi: lead energies plus all couplings.
  SparseComplex static_hamiltonian(double chi, Index counted) const;
  /// System part sum_ij h_ij(t) c_i^+ c_j.
  SparseComplex system_hamiltonian(double t) const;

  /// sum_k kappa_k (c^+ a_k - a_k^+ c) and sum_k kappa_k (c^+ a_k + a_k^+ c).
  const SparseReal& coupling_odd(Index reservoir) const { return odd_.at(static_cast<std::size_t>(reservoir)); }
  const SparseReal& coupling_even(Index reservoir) const { return even_.at(static_cast<std::size_t>(reservoir)); }

  struct Jump {
    SparseReal op;
    double rate;
  };
  const std::vector<Jump>& jumps() const { return jumps_; }
  /// Diagonal of sum_j rate_j J_j^+ J_j.
  const RVector& decay() const { return decay_; }

  /// Product state with <n_j> = occupations(j).
  CMatrix product_state(const RVector& occupations) const;
  /// Product state matching a diagonal single-particle covariance.
  CMatrix state_from_covariance(const CMatrix& c) const;
  /// C_ij = Tr(b_j^+ b_i rho).
  CMatrix covariance(const CMatrix& rho) const;

 private:
  const AssembledModel* model_;
  FockSpace space_;
  std::vector<std::vector<SparseReal>> hopping_;  // c_i^+ c_j on the system
  SparseReal lead_energy_;
  std::vector<SparseReal> couplings_;  // sum_k kappa_k c^+ a_k per reservoir
  std::vector<SparseReal> odd_;
  std::vector<SparseReal> even_;
  std::vector<Jump> jumps_;
  RVector decay_;
};

/// L_chi rho = -i (H_chi rho - rho H_{-chi}) + sum_j r_j (J rho J^+ - {J^+ J, rho}/2).
class TiltedGenerator {
 public:
  TiltedGenerator(const FockSpaceModel& model, double chi, Index counted);

  double chi() const { return chi_; }
  Index counted() const { return counted_; }
  const FockSpaceModel& model() const { return *model_; }

  CMatrix apply(double t, const CMatrix& rho) const;

  /// Dense 4^m x 4^m matrix on column-stacked rho; only for m <= 5.
  CMatrix superoperator(double t) const;

  /// L' rho = -{K, rho}/2 and L'' rho = (i/4)[V, rho]: chi-derivatives at 0.
  CMatrix first_derivative(const CMatrix& rho) const;
  CMatrix second_derivative(const CMatrix& rho) const;

 private:
  const FockSpaceModel* model_;
  double chi_;
  Index counted_;
  SparseComplex static_plus_;   // static part of H_chi
  SparseComplex static_minus_;  // static part of H_{-chi}
  std::vector<std::pair<SparseReal, double>> jumps_;  // (J^+, rate)
};

struct TiltedState {
  CMatrix rho;
  double chi = 0.0;
  double start = 0.0;
  double time = 0.0;

  Complex characteristic() const { return rho.trace(); }
};

/// RK4 evolution of rho from `state.time` to t_end.
TiltedState evolve_tilted(const TiltedGenerator& generator, TiltedState state, double t_end,
                          double dt);

/// Starts a window at `start` from the untilted state rho.
TiltedState open_tilted(const CMatrix& rho, double chi, double start);

struct Cumulants {
  Complex mean = 0.0;
  Complex variance = 0.0;
  double mean_error = 0.0;
  double variance_error = 0.0;
};

/// <N> = -i d/dchi ln G and var N = -d^2/dchi^2 ln G at 0 from samples at
/// chi in {-2h, -h, 0, h, 2h} (five-point stencils; the error estimate is the
/// gap to the three-point stencils).
Cumulants cumulants_from_cf(const std::array<Complex, 5>& g, double h);

struct CumulantSeries {
  std::vector<double> times;
  std::vector<double> current;
  std::vector<double> noise;
  double max_imaginary = 0.0;
  double truncation_error = 0.0;
};

struct OracleRunOptions {
  double dt = 0.01;
  Index stride = 1;
  double chi_step = 1e-3;
};

/// J(t) and D(t, t0) from the chi-derivatives of Gdot/G, with Gdot = Tr(L_chi rho_chi)
/// evaluated exactly at each sample.
CumulantSeries cf_cumulant_path(const FockSpaceModel& model, Index counted, const CMatrix& rho0,
                                double t0, double t_end, const OracleRunOptions& options = {});

/// J = -i Tr(L' rho), D = -Tr(L'' rho) - 2 Tr(L' sigma) with
/// d sigma/dt = L sigma + L' rho - rho Tr(L' rho), sigma(t0) = 0.
CumulantSeries sigma_cumulant_path(const FockSpaceModel& model, Index counted, const CMatrix& rho0,
                                   double t0, double t_end, const OracleRunOptions& options = {});

enum class ChargeLattice {
  integer,       // chi on [-pi, pi); product initial states
  half_integer,  // chi on [-2 pi, 2 pi); windows opened on correlated states
};

struct DistributionOptions {
  Index points = 256;  // power of two
  ChargeLattice lattice = ChargeLattice::integer;
  double normalization_tolerance = 1e-6;
};

struct Distribution {
  std::vector<double> charges;
  std::vector<double> probabilities;
  double max_imaginary = 0.0;

  double total() const;
  double mean() const;
  double variance() const;
};

/// Discrete Fourier inversion of G on a uniform grid that includes chi = 0.
Distribution distribution(const std::function<Complex(double)>& cf,
                          const DistributionOptions& options = {});

struct JointDistribution {
  std::vector<double> charges;  // shared by both axes
  RMatrix probabilities;        // (first window, second window)
  double max_imaginary = 0.0;

  double total() const;
  double mean(int axis) const;
  double variance(int axis) const;
  double covariance() const;
  /// Variance of the summed charge.
  double total_variance() const;
};

JointDistribution joint_distribution(const std::function<Complex(double, double)>& cf,
                                     const DistributionOptions& options = {});

/// G(chi, t, t0) for a window [t0, t] starting from rho at t0.
Complex characteristic_function(const FockSpaceModel& model, Index counted, const CMatrix& rho,
                                double t0, double t, double chi, double dt);

/// G(chi1, chi2) for consecutive windows [t0, t1] and [t1, t2] on one trajectory.
Complex joint_characteristic_function(const FockSpaceModel& model, Index counted,
                                      const CMatrix& rho, double t0, double t1, double t2,
                                      double chi1, double chi2, double dt);

/// Untilted rho evolved from t0 to t.
CMatrix evolve_state(const FockSpaceModel& model, const CMatrix& rho, double t0, double t, double dt);

}  // namespace mesofcs
