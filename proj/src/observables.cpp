#include "mesofcs/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

namespace mesofcs {

namespace {

double checked_real(Complex z, const char* what) {
  if (std::abs(z.imag()) > 1e-10 * std::max(1.0, std::abs(z.real()))) {
    throw ValidationError(std::string(what) + ": imaginary residue " + std::to_string(z.imag()) +
                          " exceeds tolerance");
  }
  return z.real();
}

Complex trace_product(const RMatrix& g, const CMatrix& m, const char* what) {
  if (g.rows() != m.cols() || g.cols() != m.rows()) {
    throw ConfigError(std::string(what) + ": dimension mismatch");
  }
  Complex sum = 0.0;
  for (Index j = 0; j < g.cols(); ++j)
    for (Index i = 0; i < g.rows(); ++i)
      if (g(i, j) != 0.0) sum += g(i, j) * m(j, i);
  return sum;
}

double time_tolerance(double t) { return 1e-9 * std::max(1.0, std::abs(t)); }

void check_series(const Series& s) {
  if (s.times.size() != s.values.size()) throw ConfigError("series: times and values differ in size");
  if (s.times.empty()) throw ValidationError("series is empty");
}

double clamp_to_span(const Series& s, double t, const char* what) {
  if (t < s.front_time() - time_tolerance(t) || t > s.back_time() + time_tolerance(t)) {
    throw ValidationError(std::string(what) + ": t = " + std::to_string(t) + " outside [" +
                          std::to_string(s.front_time()) + ", " + std::to_string(s.back_time()) +
                          "]");
  }
  return std::clamp(t, s.front_time(), s.back_time());
}

// Index i with times[i] <= t < times[i+1] (last segment for t == back).
std::size_t segment(const Series& s, double t) {
  auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
  std::size_t i = static_cast<std::size_t>(it - s.times.begin());
  if (i == 0) return 0;
  return std::min(i - 1, s.size() >= 2 ? s.size() - 2 : 0);
}

double interpolate(const Series& s, std::size_t i, double t) {
  if (s.size() == 1) return s.values[0];
  const double t0 = s.times[i], t1 = s.times[i + 1];
  const double x = (t - t0) / (t1 - t0);
  return s.values[i] + x * (s.values[i + 1] - s.values[i]);
}

// Lagrange interpolation through the `order` samples nearest to t (fewer
// near short series). Shifted comparisons J(t + tau) vs J(t) need this: the
// linear interpolant's dt^2 J''/8 error is comparable to LC tolerances.
double interpolate_smooth(const Series& s, double t, std::size_t order = 8) {
  const std::size_t p = std::min(order, s.size());
  if (p <= 2) return interpolate(s, segment(s, t), t);
  const std::size_t i = segment(s, t);
  std::size_t lo = i + 1 >= p / 2 ? i + 1 - p / 2 : 0;
  lo = std::min(lo, s.size() - p);
  double sum = 0.0;
  for (std::size_t a = lo; a < lo + p; ++a) {
    if (t == s.times[a]) return s.values[a];
    double w = 1.0;
    for (std::size_t b = lo; b < lo + p; ++b)
      if (b != a) w *= (t - s.times[b]) / (s.times[a] - s.times[b]);
    sum += w * s.values[a];
  }
  return sum;
}

std::string scientific(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", x);
  return buf;
}

}  // namespace

NotConvergedError::NotConvergedError(const std::string& what, double residual)
    : ValidationError(what + " (best residual " + scientific(residual) + ")"), residual_(residual) {}

double instantaneous_current(const RMatrix& g, const CMatrix& c) {
  return checked_real(kI * trace_product(g, c, "instantaneous_current"), "instantaneous_current");
}

double instantaneous_noise(const RMatrix& g, const CMatrix& aux) {
  return checked_real(2.0 * trace_product(g, aux, "instantaneous_noise"), "instantaneous_noise");
}

double sample(const Series& s, double t) {
  check_series(s);
  t = clamp_to_span(s, t, "sample");
  return interpolate(s, segment(s, t), t);
}

double integrate(const Series& s, double ta, double tb) {
  check_series(s);
  if (tb < ta) throw ValidationError("integrate: interval end precedes start");
  ta = clamp_to_span(s, ta, "integrate");
  tb = clamp_to_span(s, tb, "integrate");
  if (ta == tb || s.size() == 1) return 0.0;

  const std::size_t ia = segment(s, ta);
  const std::size_t ib = segment(s, tb);
  const double fa = interpolate(s, ia, ta);
  const double fb = interpolate(s, ib, tb);
  if (ia == ib) return 0.5 * (fa + fb) * (tb - ta);

  double sum = 0.5 * (fa + s.values[ia + 1]) * (s.times[ia + 1] - ta);
  for (std::size_t i = ia + 1; i < ib; ++i) {
    sum += 0.5 * (s.values[i] + s.values[i + 1]) * (s.times[i + 1] - s.times[i]);
  }
  sum += 0.5 * (s.values[ib] + fb) * (tb - s.times[ib]);
  return sum;
}

LimitCycle detect_limit_cycle(const Series& current, double tau, double tol) {
  check_series(current);
  if (!(tau > 0.0)) throw ConfigError("detect_limit_cycle: period must be > 0");
  if (current.back_time() - current.front_time() < 3.0 * tau - time_tolerance(current.back_time())) {
    throw NotConvergedError("limit cycle: trace shorter than three periods",
                            std::numeric_limits<double>::infinity());
  }

  // e[j] = |J(t_j + tau) - J(t_j)| for every sample whose shift stays in range.
  std::vector<double> e;
  for (std::size_t j = 0; j < current.size(); ++j) {
    const double ts = current.times[j] + tau;
    if (ts > current.back_time() + time_tolerance(ts)) break;
    const double t = std::min(ts, current.back_time());
    e.push_back(std::abs(interpolate_smooth(current, t) - current.values[j]));
  }

  // Sliding maximum of e over [t_i, t_i + tau].
  double best = std::numeric_limits<double>::infinity();
  std::deque<std::size_t> window;
  std::size_t hi = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double end = current.times[i] + tau;
    if (end > current.times[e.size() - 1] + time_tolerance(end)) break;
    while (hi < e.size() && current.times[hi] <= end + time_tolerance(end)) {
      while (!window.empty() && e[window.back()] <= e[hi]) window.pop_back();
      window.push_back(hi);
      ++hi;
    }
    while (window.front() < i) window.pop_front();
    const double r = e[window.front()];
    best = std::min(best, r);
    if (r <= tol) return {current.times[i], i, r};
  }
  throw NotConvergedError("limit cycle not reached within the trace", best);
}

double periodicity_residual(const Series& current, double t1, double tau) {
  check_series(current);
  if (!(tau > 0.0)) throw ConfigError("periodicity_residual: period must be > 0");
  clamp_to_span(current, t1, "periodicity_residual");
  clamp_to_span(current, t1 + 2.0 * tau, "periodicity_residual");
  double r = 0.0;
  auto it = std::lower_bound(current.times.begin(), current.times.end(), t1 - time_tolerance(t1));
  for (std::size_t j = static_cast<std::size_t>(it - current.times.begin()); j < current.size(); ++j) {
    const double t = current.times[j];
    if (t > t1 + tau + time_tolerance(t)) break;
    r = std::max(r, std::abs(interpolate_smooth(current, std::min(t + tau, current.back_time())) -
                             current.values[j]));
  }
  return r;
}

double lc_average_current(const Series& current, double t1, double tau) {
  if (!(tau > 0.0)) throw ConfigError("lc_average_current: period must be > 0");
  return integrate(current, t1, t1 + tau) / tau;
}

namespace {

void check_window_start(const Series& noise, double t1, const char* what) {
  check_series(noise);
  if (std::abs(noise.front_time() - t1) > time_tolerance(t1)) {
    throw ValidationError(std::string(what) + ": window opened at " +
                          std::to_string(noise.front_time()) + ", expected " + std::to_string(t1));
  }
}

}  // namespace

double single_period_noise(const Series& noise, double t1, double tau) {
  if (!(tau > 0.0)) throw ConfigError("single_period_noise: period must be > 0");
  check_window_start(noise, t1, "single_period_noise");
  return integrate(noise, t1, t1 + tau) / tau;
}

ZeroFrequencyNoise zero_frequency_noise(const Series& noise, double t1, double tau,
                                        const ZeroFrequencyOptions& options) {
  if (!(tau > 0.0)) throw ConfigError("zero_frequency_noise: period must be > 0");
  check_window_start(noise, t1, "zero_frequency_noise");
  const double span = noise.back_time() - t1;
  const Index m = static_cast<Index>(std::floor(span / tau + 1e-9));
  if (m < 1) throw NotConvergedError("zero_frequency_noise: less than one period of data", 0.0);

  ZeroFrequencyNoise out;
  out.periods = m;
  for (Index q = 0; q < m; ++q) {
    const double a = t1 + static_cast<double>(q) * tau;
    out.period_averages.push_back(integrate(noise, a, a + tau) / tau);
  }
  out.last_period = out.period_averages.back();
  out.total_average = integrate(noise, t1, t1 + static_cast<double>(m) * tau) /
                      (static_cast<double>(m) * tau);
  const double scale = std::max(std::abs(out.last_period), std::numeric_limits<double>::min());
  out.relative_difference = std::abs(out.last_period - out.total_average) / scale;
  if (m >= 2 && m >= options.min_periods) {
    const double change = std::abs(out.period_averages[m - 1] - out.period_averages[m - 2]);
    out.converged = change <= options.tolerance * scale;
  }
  return out;
}

double charge_variance(const Series& noise, double t1, double t2) {
  check_window_start(noise, t1, "charge_variance");
  return integrate(noise, t1, t2);
}

VarianceDecomposition decompose_variance(const Series& window_t0, const Series& window_t1,
                                         double t0, double t1, double t2) {
  if (!(t0 <= t1 && t1 <= t2)) throw ConfigError("decompose_variance: need t0 <= t1 <= t2");
  VarianceDecomposition d;
  d.total = charge_variance(window_t0, t0, t2);
  d.early = charge_variance(window_t0, t0, t1);
  d.late = t1 == t0 ? charge_variance(window_t0, t0, t2) : charge_variance(window_t1, t1, t2);
  d.covariance = 0.5 * (d.total - d.late - d.early);
  return d;
}

double covariance_decomposition_residual(const VarianceDecomposition& d) {
  return d.total - d.late - d.early - 2.0 * d.covariance;
}

double fano_factor(double zero_frequency_noise, double average_current, double min_current) {
  if (!(std::abs(average_current) > min_current)) {
    throw ValidationError("fano_factor: average current " + std::to_string(average_current) +
                          " too close to zero");
  }
  return zero_frequency_noise / std::abs(average_current);
}

// RunTrace lookups live here with the rest of the trace post-processing.

std::size_t RunTrace::current_index(const std::string& label) const {
  for (std::size_t i = 0; i < currents.size(); ++i)
    if (currents[i].label == label) return i;
  throw ConfigError("no current series for reservoir '" + label + "'");
}

std::size_t RunTrace::noise_index(const std::string& label, double start) const {
  for (std::size_t i = 0; i < noises.size(); ++i)
    if (noises[i].label == label && std::abs(noises[i].start - start) <= time_tolerance(start))
      return i;
  throw ConfigError("no noise series for reservoir '" + label + "' at t1 = " +
                    std::to_string(start));
}

}  // namespace mesofcs
