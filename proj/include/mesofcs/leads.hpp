#pragma once

#include <vector>

#include "mesofcs/common.hpp"
#include "mesofcs/model.hpp"

namespace mesofcs {

/// A continuum reservoir replaced by N damped lead modes.
///
/// Energies sit at the midpoints of N equal bins over [-W, W], so every mode
/// has the same damping gamma_k = 2W/N (the level spacing). Couplings follow
/// kappa_k = sqrt(J(eps_k) gamma_k / 2 pi) and occupations f_k are the Fermi
/// function of the parent reservoir.
struct LeadDiscretization {
  ReservoirSpec reservoir;
  RVector energies;
  RVector damping;
  RVector coupling;
  RVector occupation;

  Index size() const { return energies.size(); }
};

LeadDiscretization discretize(const ReservoirSpec& spec);

/// Lead modes given explicitly rather than sampled from a band (any count
/// >= 1). `reservoir` supplies label, site, temperature and chemical
/// potential; occupations follow from the latter two.
LeadDiscretization explicit_lead(const ReservoirSpec& reservoir, RVector energies, RVector damping,
                                 RVector coupling);

/// Sum of Lorentzians sum_k kappa_k^2 gamma_k / ((omega - eps_k)^2 + (gamma_k/2)^2).
double effective_spectral_density(const LeadDiscretization& leads, double omega);

struct ConvergenceRow {
  Index modes = 0;
  double max_relative_deviation = 0.0;  // absolute deviation when J == 0
  bool relative = true;
};

struct ConvergenceOptions {
  double window_fraction = 0.8;  // |omega| <= fraction * W
  Index samples = 4001;
};

/// Max deviation of the effective from the true spectral density over the
/// interior window, for each requested mode count.
std::vector<ConvergenceRow> convergence_report(const ReservoirSpec& spec,
                                               const std::vector<Index>& mode_counts,
                                               const ConvergenceOptions& options = {});

}  // namespace mesofcs
