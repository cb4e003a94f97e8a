#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mesofcs/common.hpp"

namespace mesofcs {

/// Sampled real function of time. `times` is strictly increasing.
struct Series {
  std::span<const double> times;
  std::span<const double> values;

  std::size_t size() const { return times.size(); }
  double front_time() const { return times.front(); }
  double back_time() const { return times.back(); }
};

struct CurrentSeries {
  Index reservoir = 0;
  std::string label;
  std::vector<double> values;  // aligned with RunTrace::times
};

/// D(t, t1) for one counting window; values[i] belongs to times[first_sample + i].
struct NoiseSeries {
  Index reservoir = 0;
  std::string label;
  double start = 0.0;
  std::size_t first_sample = 0;
  std::vector<double> values;
};

struct Snapshot {
  double time = 0.0;
  CMatrix covariance;
};

/// Worst values seen by the invariant checks over a run.
struct Diagnostics {
  Index checks = 0;
  double hermiticity = 0.0;       // max |C - C^+| / max|C|
  double anti_hermiticity = 0.0;  // max |Ct + Ct^+| / max(1, max|Ct|)
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double imaginary_residue = 0.0;  // largest |Im| relative to max(1, |Re|) of J or D
  double resymmetrization = 0.0;   // largest correction applied
  Index resymmetrizations = 0;

  bool within_bounds(double herm_tol = 1e-10, double spec_tol = 1e-8) const {
    return hermiticity <= herm_tol && anti_hermiticity <= herm_tol &&
           min_eigenvalue >= -spec_tol && max_eigenvalue <= 1.0 + spec_tol;
  }
};

struct RunTrace {
  std::vector<double> times;
  std::vector<CurrentSeries> currents;
  std::vector<NoiseSeries> noises;
  std::vector<Snapshot> snapshots;
  Diagnostics diagnostics;
  std::uint64_t model_hash = 0;
  double dt = 0.0;
  Index stride = 1;

  Series current(std::size_t i) const {
    return {std::span<const double>(times), std::span<const double>(currents.at(i).values)};
  }
  Series noise(std::size_t i) const {
    const auto& n = noises.at(i);
    return {std::span<const double>(times).subspan(n.first_sample, n.values.size()),
            std::span<const double>(n.values)};
  }
  std::size_t current_index(const std::string& label) const;
  std::size_t noise_index(const std::string& label, double start) const;
};

}  // namespace mesofcs
