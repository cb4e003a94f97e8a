#pragma once

#include <vector>

#include "mesofcs/common.hpp"
#include "mesofcs/trace.hpp"

namespace mesofcs {

/// Re[i Tr(G C)]; throws ValidationError if the imaginary residue exceeds
/// 1e-10 max(1, |value|).
double instantaneous_current(const RMatrix& g, const CMatrix& c);
/// Re[2 Tr(G Ct)], same residue check.
double instantaneous_noise(const RMatrix& g, const CMatrix& aux);

/// Trapezoid integral of the piecewise-linear interpolant over [ta, tb];
/// interior endpoints are interpolated, so the result is exactly additive.
double integrate(const Series& s, double ta, double tb);

/// <N(tb, ta)> from a current series.
inline double integrated_charge(const Series& current, double ta, double tb) {
  return integrate(current, ta, tb);
}

/// Linear interpolation of a series at t (inside its span).
double sample(const Series& s, double t);

/// Thrown when a convergence test does not pass within the available data.
class NotConvergedError : public ValidationError {
 public:
  NotConvergedError(const std::string& what, double residual);
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

struct LimitCycle {
  double start = 0.0;
  std::size_t index = 0;
  double residual = 0.0;  // max over one period of |J(t + tau) - J(t)|
};

/// Earliest stored t1 with max_{t in [t1, t1 + tau]} |J(t + tau) - J(t)| <= tol.
/// Off-grid J(t + tau) comes from 8-point local Lagrange interpolation.
LimitCycle detect_limit_cycle(const Series& current, double tau, double tol);

/// max over stored t in [t1, t1 + tau] of |J(t + tau) - J(t)|.
double periodicity_residual(const Series& current, double t1, double tau);

/// (1/tau) int_{t1}^{t1+tau} J dt.
double lc_average_current(const Series& current, double t1, double tau);

/// (1/tau) int_0^tau D(t1 + t', t1) dt'; the series must start at t1.
double single_period_noise(const Series& noise, double t1, double tau);

struct ZeroFrequencyOptions {
  Index min_periods = 10;
  double tolerance = 1e-3;  // relative change between the last two period averages
};

struct ZeroFrequencyNoise {
  double last_period = 0.0;    // (1/tau) int over the last complete period
  double total_average = 0.0;  // (1/(t - t1)) int_{t1}^{t} D dt' over all complete periods
  double relative_difference = 0.0;
  Index periods = 0;
  std::vector<double> period_averages;
  bool converged = false;
};

/// Period-averaged noise at the end of the trace plus the total time average.
/// Fewer than `min_periods` complete periods gives converged = false.
ZeroFrequencyNoise zero_frequency_noise(const Series& noise, double t1, double tau,
                                        const ZeroFrequencyOptions& options = {});

/// var N(t2, t1) = int_{t1}^{t2} D(t, t1) dt for a window opened at t1.
double charge_variance(const Series& noise, double t1, double t2);

struct VarianceDecomposition {
  double total = 0.0;   // var N(t2, t0)
  double late = 0.0;    // var N(t2, t1)
  double early = 0.0;   // var N(t1, t0)
  double covariance = 0.0;
};

/// Splits var N(t2, t0) using windows opened at t0 and t1 on one trajectory.
/// The covariance follows from the other three terms.
VarianceDecomposition decompose_variance(const Series& window_t0, const Series& window_t1,
                                         double t0, double t1, double t2);

/// total - late - early - 2 covariance.
double covariance_decomposition_residual(const VarianceDecomposition& d);

/// S_inf / |J|; throws ValidationError when |J| <= min_current.
double fano_factor(double zero_frequency_noise, double average_current,
                   double min_current = 1e-12);

}  // namespace mesofcs
