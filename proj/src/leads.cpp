#include "mesofcs/leads.hpp"

#include <algorithm>
#include <cmath>

namespace mesofcs {

LeadDiscretization discretize(const ReservoirSpec& spec) {
  spec.validate();
  const Index n = spec.modes;
  const double w = spec.spectral_density.half_bandwidth();
  const double spacing = 2.0 * w / static_cast<double>(n);

  LeadDiscretization out;
  out.reservoir = spec;
  out.energies.resize(n);
  out.damping = RVector::Constant(n, spacing);
  out.coupling.resize(n);
  out.occupation.resize(n);
  for (Index k = 0; k < n; ++k) {
    const double eps = -w + (static_cast<double>(k) + 0.5) * spacing;
    out.energies(k) = eps;
    out.coupling(k) = std::sqrt(spec.spectral_density(eps) * spacing / (2.0 * kPi));
    out.occupation(k) = fermi_occupation(eps, spec.temperature, spec.chemical_potential);
  }
  return out;
}

LeadDiscretization explicit_lead(const ReservoirSpec& reservoir, RVector energies, RVector damping,
                                 RVector coupling) {
  const Index n = energies.size();
  if (n < 1 || damping.size() != n || coupling.size() != n) {
    throw ConfigError("reservoir '" + reservoir.label +
                      "': explicit lead needs matching, non-empty energy/damping/coupling lists");
  }
  if (!(reservoir.temperature > 0.0)) {
    throw ConfigError("reservoir '" + reservoir.label + "': temperature must be > 0");
  }
  if (!energies.allFinite() || !coupling.allFinite() || !(damping.array() > 0.0).all()) {
    throw ConfigError("reservoir '" + reservoir.label +
                      "': explicit lead values must be finite with damping > 0");
  }
  LeadDiscretization out;
  out.reservoir = reservoir;
  out.reservoir.modes = n;
  out.energies = std::move(energies);
  out.damping = std::move(damping);
  out.coupling = std::move(coupling);
  out.occupation.resize(n);
  for (Index k = 0; k < n; ++k) {
    out.occupation(k) = fermi_occupation(out.energies(k), reservoir.temperature,
                                         reservoir.chemical_potential);
  }
  return out;
}

double effective_spectral_density(const LeadDiscretization& leads, double omega) {
  double sum = 0.0;
  for (Index k = 0; k < leads.size(); ++k) {
    const double g = leads.damping(k);
    const double d = omega - leads.energies(k);
    const double kappa = leads.coupling(k);
    sum += kappa * kappa * g / (d * d + 0.25 * g * g);
  }
  return sum;
}

std::vector<ConvergenceRow> convergence_report(const ReservoirSpec& spec,
                                               const std::vector<Index>& mode_counts,
                                               const ConvergenceOptions& options) {
  if (mode_counts.empty()) throw ConfigError("convergence_report: no mode counts given");
  const double w = spec.spectral_density.half_bandwidth();
  const double limit = options.window_fraction * w;

  std::vector<ConvergenceRow> rows;
  for (Index n : mode_counts) {
    ReservoirSpec s = spec;
    s.modes = n;
    const LeadDiscretization leads = discretize(s);

    // Uniform grid plus every mode centre and bin edge in the window; the
    // Lorentzian ripple peaks at the centres and dips at the edges.
    std::vector<double> grid;
    const Index samples = std::max<Index>(options.samples, 2);
    for (Index i = 0; i < samples; ++i) {
      grid.push_back(-limit + 2.0 * limit * static_cast<double>(i) / static_cast<double>(samples - 1));
    }
    for (Index k = 0; k < leads.size(); ++k) {
      const double e = leads.energies(k);
      const double edge = e + 0.5 * leads.damping(k);
      if (std::abs(e) <= limit) grid.push_back(e);
      if (std::abs(edge) <= limit) grid.push_back(edge);
    }

    ConvergenceRow row;
    row.modes = n;
    bool any_nonzero = false;
    double rel = 0.0;
    double abs_dev = 0.0;
    for (double omega : grid) {
      const double exact = spec.spectral_density(omega);
      const double approx = effective_spectral_density(leads, omega);
      abs_dev = std::max(abs_dev, std::abs(approx - exact));
      if (exact > 0.0) {
        any_nonzero = true;
        rel = std::max(rel, std::abs(approx - exact) / exact);
      }
    }
    row.relative = any_nonzero;
    row.max_relative_deviation = any_nonzero ? rel : abs_dev;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mesofcs
