#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mesofcs {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CMatrix = Matrix<Complex>;
using RMatrix = Matrix<double>;
using CVector = Vector<Complex>;
using RVector = Vector<double>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr const char* kVersion = "0.1.0";

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (configuration, spec fields, indices).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state or broken invariant during time integration.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double time)
      : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// A numerical check failed (tolerance, convergence, normalization).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Max-norm helpers; Eigen has no entrywise inf-norm on complex expressions
// that skips the abs() temporary.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  return max_abs(m - m.adjoint());
}

template <typename Derived>
double anti_hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  return max_abs(m + m.adjoint());
}

}  // namespace mesofcs
