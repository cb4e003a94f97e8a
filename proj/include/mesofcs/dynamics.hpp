#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mesofcs/common.hpp"
#include "mesofcs/leads.hpp"
#include "mesofcs/model.hpp"
#include "mesofcs/trace.hpp"

namespace mesofcs {

enum class ProductMode {
  structured,  // O(n^2) products using the arrowhead structure of H
  dense,       // plain O(n^3) products with W(t); reference path
};

/// dC/dt = -(W C + C W^+) + F.
CMatrix lyapunov_rhs(const AssembledModel& model, double t, const CMatrix& c,
                     ProductMode mode = ProductMode::structured);

/// Source term -1/2 [C G (1 - C) + (1 - C) G C] of the auxiliary equation.
CMatrix auxiliary_source(const AssembledModel& model, Index reservoir, const CMatrix& c,
                         ProductMode mode = ProductMode::structured);

/// dCt/dt = -(W Ct + Ct W^+) - 1/2 [C G (1 - C) + (1 - C) G C], with C the
/// covariance at the same instant.
CMatrix auxiliary_rhs(const AssembledModel& model, Index reservoir, double t, const CMatrix& c,
                      const CMatrix& aux, ProductMode mode = ProductMode::structured);

// ---------------------------------------------------------------------------
// Classical fourth-order Runge-Kutta on any vector-space-like state.

inline bool all_finite(double x) { return std::isfinite(x); }
template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

template <typename State, typename Rhs>
State rk4_step(Rhs&& rhs, double t, double dt, const State& y) {
  if (!(dt > 0.0)) throw ConfigError("rk4_step: dt must be > 0");
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + 0.5 * dt, State(y + (0.5 * dt) * k1));
  const State k3 = rhs(t + 0.5 * dt, State(y + (0.5 * dt) * k2));
  const State k4 = rhs(t + dt, State(y + dt * k3));
  State next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!all_finite(next)) throw IntegrationError("non-finite state after RK4 step", t + dt);
  return next;
}

/// Covariance plus any number of auxiliary matrices advanced together.
struct JointState {
  CMatrix covariance;
  std::vector<CMatrix> auxiliary;
};

JointState operator+(const JointState& a, const JointState& b);
JointState operator*(double s, const JointState& a);
bool all_finite(const JointState& s);

/// Right-hand side of the joint system: aux[w] is counted on reservoirs[w].
JointState joint_rhs(const AssembledModel& model, const std::vector<Index>& reservoirs, double t,
                     const JointState& state, ProductMode mode = ProductMode::structured);

// ---------------------------------------------------------------------------

enum class InitialCovariance {
  empty,         // C = 0
  leads_thermal,  // C = diag(f_k) on the leads, 0 on the system
  half_filled     // leads as above, 1/2 on every system site
};

CMatrix initial_covariance(const AssembledModel& model, InitialCovariance kind);

struct PropagatorOptions {
  double dt = 0.01;
  Index resymmetrize_every = 1000;
  ProductMode mode = ProductMode::structured;
};

/// Owns one covariance trajectory and any auxiliary matrices opened on it.
/// The model must outlive the propagator.
class Propagator {
 public:
  struct Window {
    Index reservoir = 0;
    double start = 0.0;
  };

  Propagator(const AssembledModel& model, CMatrix initial, double start_time,
             PropagatorOptions options = {});

  /// Starts a counting window for `reservoir` at the current time (Ct = 0).
  Index open_window(Index reservoir);

  void step();

  double time() const;
  Index steps_taken() const { return steps_; }
  double dt() const { return options_.dt; }
  const AssembledModel& model() const { return *model_; }

  const CMatrix& covariance() const { return cov_.y; }
  const CMatrix& auxiliary(Index window) const;
  const Window& window(Index w) const { return windows_.at(static_cast<std::size_t>(w)); }
  Index window_count() const { return static_cast<Index>(windows_.size()); }

  /// J_nu = i Tr[G_nu C]; complex so callers can inspect the residue.
  Complex current(Index reservoir) const;
  /// D_nu(t, t1) = 2 Tr[G_nu Ct].
  Complex noise(Index window) const;

  /// Largest correction applied by periodic re-symmetrization so far.
  double resymmetrization_correction() const { return resym_max_; }
  Index resymmetrizations() const { return resym_count_; }

 private:
  struct Slot {
    CMatrix y;
    CMatrix acc;
    CMatrix stage;
  };

  void step_structured();
  void step_dense();
  void resymmetrize();

  const AssembledModel* model_;
  PropagatorOptions options_;
  double start_time_;
  Index steps_ = 0;
  Slot cov_;
  std::vector<Slot> aux_;
  std::vector<Window> windows_;
  ArrowheadHamiltonian h_;
  double resym_max_ = 0.0;
  Index resym_count_ = 0;
};

/// Fast trace forms: only the couplings of one reservoir enter.
Complex counting_trace(const ReservoirBlock& block, const CMatrix& m);

struct IntegratorConfig {
  double dt = 0.01;
  double t_start = 0.0;
  double t_max = 0.0;
  std::vector<double> window_starts;
  Index stride = 1;
  Index check_every = 100;  // invariant checks; 0 disables
  bool store_snapshots = false;
  Index resymmetrize_every = 1000;
  ProductMode mode = ProductMode::structured;
  bool strict = false;  // throw on invariant violation instead of recording it
};

/// Number of dt steps from `from` to `to`; ConfigError when `to` is off the grid.
Index grid_steps(double from, double to, double dt, const char* what);

/// Records J for every reservoir and D for every open window while a
/// propagator advances. Samples land on steps that are multiples of `stride`;
/// invariant checks run every `check_every` steps.
class TraceRecorder {
 public:
  TraceRecorder(Propagator& prop, Index stride, Index check_every = 100,
                bool store_snapshots = false, bool strict = false);

  /// Opens a window per probe at the current time.
  void open_windows(const std::vector<Index>& probes);
  /// One propagator step followed by sampling and checks.
  void advance();
  /// Final invariant check (skipped if the current step was just checked).
  void finish();

  const Propagator& propagator() const { return *prop_; }
  const RunTrace& trace() const { return trace_; }
  RunTrace take() { return std::move(trace_); }

 private:
  void record();
  void check();

  Propagator* prop_;
  Index stride_;
  Index check_every_;
  bool store_snapshots_;
  bool strict_;
  Index last_sampled_ = -1;
  Index last_checked_ = -1;
  RunTrace trace_;
};

/// Integrates C from t_start to t_max, opening auxiliary matrices for every
/// probe at each window start, and records J and D at the storage stride.
RunTrace evolve(const AssembledModel& model, const CMatrix& initial, const IntegratorConfig& config,
                const std::vector<Index>& probes);

/// Checks C and the auxiliaries against the state invariants and folds the
/// result into `diag`.
void check_invariants(const Propagator& prop, Diagnostics& diag);

}  // namespace mesofcs
