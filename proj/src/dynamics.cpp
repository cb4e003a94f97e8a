#include "mesofcs/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace mesofcs {

namespace {

// Rank-2 pieces of the auxiliary source. With u = e_p and v the couplings of
// the counted reservoir, G = u v^T - v u^T and
//   C G (1-C) + (1-C) G C = C G + G C - 2 C G C
//                         = a v^T - b u^T + u r2 - v r1 - 2 (a r2 - b r1)
// where a = C u, b = C v, r1 = u^T C, r2 = v^T C.
struct SourceVectors {
  Index site = 0;
  RVector v;
  CVector a, b, r1, r2;
};

SourceVectors source_vectors(const ReservoirBlock& block, Index n, const CMatrix& c) {
  SourceVectors s;
  s.site = block.site;
  s.v = RVector::Zero(n);
  s.v.segment(block.offset, block.size) = block.coupling;
  const CVector kappa = block.coupling.cast<Complex>();
  s.a = c.col(block.site);
  s.b = c.middleCols(block.offset, block.size) * kappa;
  s.r1 = c.row(block.site).transpose();
  s.r2 = (kappa.transpose() * c.middleRows(block.offset, block.size)).transpose();
  return s;
}

inline Complex source_entry(const SourceVectors& s, Index i, Index j) {
  Complex out = s.a(i) * s.r2(j) - s.b(i) * s.r1(j) - 0.5 * (s.a(i) * s.v(j) - s.v(i) * s.r1(j));
  if (i == s.site) out -= 0.5 * s.r2(j);
  if (j == s.site) out += 0.5 * s.b(i);
  return out;
}

CMatrix source_matrix(const SourceVectors& s, Index n) {
  CMatrix out(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) out(i, j) = source_entry(s, i, j);
  return out;
}

// -i [H, M] - (gamma_i + gamma_j)/2 M_ij
CMatrix structured_generator(const ArrowheadHamiltonian& h, const RVector& gamma,
                             const CMatrix& m) {
  CMatrix out = (-kI) * h.commutator(m);
  const Index n = m.rows();
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) out(i, j) -= 0.5 * (gamma(i) + gamma(j)) * m(i, j);
  return out;
}

constexpr double kStageNode[4] = {0.0, 0.5, 0.5, 1.0};
constexpr double kStageWeight[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};

}  // namespace

CMatrix lyapunov_rhs(const AssembledModel& model, double t, const CMatrix& c, ProductMode mode) {
  if (c.rows() != model.dimension() || c.cols() != model.dimension()) {
    throw ConfigError("lyapunov_rhs: covariance has the wrong shape");
  }
  CMatrix out;
  if (mode == ProductMode::dense) {
    const CMatrix w = model.drift(t);
    out = -(w * c + c * w.adjoint());
  } else {
    out = structured_generator(model.hamiltonian(t), model.damping(), c);
  }
  out.diagonal() += model.injection().cast<Complex>();
  return out;
}

CMatrix auxiliary_source(const AssembledModel& model, Index reservoir, const CMatrix& c,
                         ProductMode mode) {
  const Index n = model.dimension();
  if (c.rows() != n || c.cols() != n) {
    throw ConfigError("auxiliary_source: covariance has the wrong shape");
  }
  if (mode == ProductMode::dense) {
    const CMatrix g = model.counting_matrix(reservoir).cast<Complex>();
    const CMatrix one_minus_c = CMatrix::Identity(n, n) - c;
    return -0.5 * (c * g * one_minus_c + one_minus_c * g * c);
  }
  return source_matrix(source_vectors(model.reservoir(reservoir), n, c), n);
}

CMatrix auxiliary_rhs(const AssembledModel& model, Index reservoir, double t, const CMatrix& c,
                      const CMatrix& aux, ProductMode mode) {
  const Index n = model.dimension();
  if (aux.rows() != n || aux.cols() != n) {
    throw ConfigError("auxiliary_rhs: auxiliary matrix has the wrong shape");
  }
  CMatrix out;
  if (mode == ProductMode::dense) {
    const CMatrix w = model.drift(t);
    out = -(w * aux + aux * w.adjoint());
  } else {
    out = structured_generator(model.hamiltonian(t), model.damping(), aux);
  }
  out += auxiliary_source(model, reservoir, c, mode);
  return out;
}

JointState operator+(const JointState& a, const JointState& b) {
  JointState out{a.covariance + b.covariance, {}};
  out.auxiliary.reserve(a.auxiliary.size());
  for (std::size_t i = 0; i < a.auxiliary.size(); ++i) {
    out.auxiliary.push_back(a.auxiliary[i] + b.auxiliary.at(i));
  }
  return out;
}

JointState operator*(double s, const JointState& a) {
  JointState out{s * a.covariance, {}};
  out.auxiliary.reserve(a.auxiliary.size());
  for (const auto& m : a.auxiliary) out.auxiliary.push_back(s * m);
  return out;
}

bool all_finite(const JointState& s) {
  if (!s.covariance.allFinite()) return false;
  return std::all_of(s.auxiliary.begin(), s.auxiliary.end(),
                     [](const CMatrix& m) { return m.allFinite(); });
}

JointState joint_rhs(const AssembledModel& model, const std::vector<Index>& reservoirs, double t,
                     const JointState& state, ProductMode mode) {
  if (reservoirs.size() != state.auxiliary.size()) {
    throw ConfigError("joint_rhs: one reservoir per auxiliary matrix required");
  }
  JointState out{lyapunov_rhs(model, t, state.covariance, mode), {}};
  out.auxiliary.reserve(reservoirs.size());
  for (std::size_t w = 0; w < reservoirs.size(); ++w) {
    out.auxiliary.push_back(
        auxiliary_rhs(model, reservoirs[w], t, state.covariance, state.auxiliary[w], mode));
  }
  return out;
}

CMatrix initial_covariance(const AssembledModel& model, InitialCovariance kind) {
  const Index n = model.dimension();
  if (kind == InitialCovariance::empty) return CMatrix::Zero(n, n);
  CMatrix c = CMatrix::Zero(n, n);
  c.diagonal() = model.thermal_occupations().cast<Complex>();
  if (kind == InitialCovariance::half_filled)
    c.diagonal().head(model.system_size()).setConstant(0.5);
  return c;
}

Complex counting_trace(const ReservoirBlock& block, const CMatrix& m) {
  Complex sum = 0.0;
  for (Index k = 0; k < block.size; ++k) {
    const Index q = block.offset + k;
    sum += block.coupling(k) * (m(q, block.site) - m(block.site, q));
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Propagator

Propagator::Propagator(const AssembledModel& model, CMatrix initial, double start_time,
                       PropagatorOptions options)
    : model_(&model), options_(options), start_time_(start_time) {
  const Index n = model.dimension();
  if (initial.rows() != n || initial.cols() != n) {
    throw ConfigError("propagator: initial covariance is " + std::to_string(initial.rows()) + "x" +
                      std::to_string(initial.cols()) + ", expected " + std::to_string(n) + "x" +
                      std::to_string(n));
  }
  if (!initial.allFinite()) throw ConfigError("propagator: non-finite initial covariance");
  if (hermiticity_defect(initial) > 1e-10 * std::max(1.0, max_abs(initial))) {
    throw ConfigError("propagator: initial covariance is not Hermitian");
  }
  if (!(options_.dt > 0.0) || !std::isfinite(options_.dt)) {
    throw ConfigError("propagator: dt must be a positive finite number");
  }
  cov_.y = std::move(initial);
  cov_.stage = cov_.y;
  cov_.acc.resize(n, n);
  h_ = model.hamiltonian(start_time);
}

double Propagator::time() const {
  return start_time_ + static_cast<double>(steps_) * options_.dt;
}

Index Propagator::open_window(Index reservoir) {
  model_->reservoir(reservoir);  // range check
  const Index n = model_->dimension();
  Slot s;
  s.y = CMatrix::Zero(n, n);
  s.stage = s.y;
  s.acc.resize(n, n);
  aux_.push_back(std::move(s));
  windows_.push_back({reservoir, time()});
  return static_cast<Index>(windows_.size()) - 1;
}

const CMatrix& Propagator::auxiliary(Index window) const {
  return aux_.at(static_cast<std::size_t>(window)).y;
}

Complex Propagator::current(Index reservoir) const {
  return kI * counting_trace(model_->reservoir(reservoir), cov_.y);
}

Complex Propagator::noise(Index window) const {
  const auto& w = windows_.at(static_cast<std::size_t>(window));
  return 2.0 * counting_trace(model_->reservoir(w.reservoir), auxiliary(window));
}

void Propagator::step() {
  if (options_.mode == ProductMode::dense) {
    step_dense();
  } else {
    step_structured();
  }
  ++steps_;
  if (!cov_.y.diagonal().allFinite()) {
    throw IntegrationError("non-finite covariance", time());
  }
  for (const auto& s : aux_) {
    if (!s.y.diagonal().allFinite()) throw IntegrationError("non-finite auxiliary matrix", time());
  }
  if (options_.resymmetrize_every > 0 && steps_ % options_.resymmetrize_every == 0) resymmetrize();
}

void Propagator::step_dense() {
  std::vector<Index> reservoirs;
  JointState y{cov_.y, {}};
  for (std::size_t w = 0; w < aux_.size(); ++w) {
    reservoirs.push_back(windows_[w].reservoir);
    y.auxiliary.push_back(aux_[w].y);
  }
  auto rhs = [&](double t, const JointState& s) {
    return joint_rhs(*model_, reservoirs, t, s, ProductMode::dense);
  };
  JointState next = rk4_step(rhs, time(), options_.dt, y);
  cov_.y = std::move(next.covariance);
  cov_.stage = cov_.y;
  for (std::size_t w = 0; w < aux_.size(); ++w) {
    aux_[w].y = std::move(next.auxiliary[w]);
    aux_[w].stage = aux_[w].y;
  }
}

namespace {

// One RK4 stage over one matrix, in place. On entry `slot.stage` holds the
// stage value M; the stage derivative k = -i[H,M] - {gamma,M}/2 + F + S is
// folded into the accumulator and `slot.stage` is overwritten with the
// argument of the next stage (or the new state after the last one).
template <typename Slot>
void fused_stage(const ArrowheadHamiltonian& h, const RVector& gamma, const RVector* injection,
                 const SourceVectors* src, int stage, double dt, Slot& slot, CMatrix& hm_rows,
                 CMatrix& mh_cols, CMatrix& sys_rows, CMatrix& sys_cols, CVector& kcol) {
  CMatrix& m = slot.stage;
  const Index n = m.rows();
  const Index l = h.system_size();
  h.system_stripes(m, hm_rows, mh_cols);
  sys_rows = m.topRows(l);
  sys_cols = m.leftCols(l);

  const double weight = kStageWeight[stage] * dt;
  const double next = stage < 3 ? kStageNode[stage + 1] * dt : 0.0;
  const double* eps = h.lead_energy.data();
  const double* kap = h.lead_coupling.data();

  for (Index j = 0; j < n; ++j) {
    Complex* __restrict mc = m.col(j).data();
    Complex* __restrict kc = kcol.data();
    // Commutator column.
    if (j < l) {
      for (Index i = 0; i < l; ++i) kc[i] = hm_rows(i, j) - mh_cols(i, j);
      for (const auto& b : h.blocks) {
        const Complex row = sys_rows(b.site, j);
        for (Index i = b.offset; i < b.offset + b.size; ++i) {
          const Index k = i - l;
          kc[i] = eps[k] * mc[i] + kap[k] * row - mh_cols(i, j);
        }
      }
    } else {
      const Index kj = j - l;
      const double eps_j = eps[kj];
      const double kap_j = kap[kj];
      const Complex* side = sys_cols.col(h.lead_site[static_cast<std::size_t>(kj)]).data();
      for (Index i = 0; i < l; ++i) kc[i] = hm_rows(i, j) - (eps_j * mc[i] + kap_j * side[i]);
      for (const auto& b : h.blocks) {
        const Complex row = sys_rows(b.site, j);
        for (Index i = b.offset; i < b.offset + b.size; ++i) {
          const Index k = i - l;
          kc[i] = (eps[k] - eps_j) * mc[i] + kap[k] * row - kap_j * side[i];
        }
      }
    }

    const double gj = gamma(j);
    const double* __restrict g = gamma.data();
    Complex* __restrict yc = slot.y.col(j).data();
    Complex* __restrict ac = slot.acc.col(j).data();
    for (Index i = 0; i < n; ++i) {
      // -i * z = (Im z, -Re z)
      Complex k(kc[i].imag(), -kc[i].real());
      k -= 0.5 * (g[i] + gj) * mc[i];
      kc[i] = k;
    }
    if (injection != nullptr) kc[j] += (*injection)(j);
    if (src != nullptr) {
      const Complex r1 = src->r1(j), r2 = src->r2(j);
      const double vj = src->v(j);
      const Complex* __restrict a = src->a.data();
      const Complex* __restrict bb = src->b.data();
      const double* __restrict v = src->v.data();
      for (Index i = 0; i < n; ++i) {
        kc[i] += a[i] * (r2 - 0.5 * vj) - bb[i] * r1 + 0.5 * v[i] * r1;
      }
      kc[src->site] -= 0.5 * r2;
      if (j == src->site) {
        for (Index i = 0; i < n; ++i) kc[i] += 0.5 * bb[i];
      }
    }

    if (stage == 0) {
      for (Index i = 0; i < n; ++i) {
        ac[i] = weight * kc[i];
        mc[i] = yc[i] + next * kc[i];
      }
    } else if (stage < 3) {
      for (Index i = 0; i < n; ++i) {
        ac[i] += weight * kc[i];
        mc[i] = yc[i] + next * kc[i];
      }
    } else {
      for (Index i = 0; i < n; ++i) {
        yc[i] += ac[i] + weight * kc[i];
        mc[i] = yc[i];
      }
    }
  }
}

}  // namespace

void Propagator::step_structured() {
  const Index n = model_->dimension();
  const Index l = model_->system_size();
  const double t0 = time();
  const double dt = options_.dt;

  CMatrix hm_rows(l, n), mh_cols(n, l), sys_rows(l, n), sys_cols(n, l);
  CVector kcol(n);
  std::vector<SourceVectors> sources(aux_.size());

  for (int s = 0; s < 4; ++s) {
    h_.system = build_system_hamiltonian(model_->system(), t0 + kStageNode[s] * dt);
    for (std::size_t w = 0; w < aux_.size(); ++w) {
      sources[w] = source_vectors(model_->reservoir(windows_[w].reservoir), n, cov_.stage);
    }
    fused_stage(h_, model_->damping(), &model_->injection(), nullptr, s, dt, cov_, hm_rows,
                mh_cols, sys_rows, sys_cols, kcol);
    for (std::size_t w = 0; w < aux_.size(); ++w) {
      fused_stage(h_, model_->damping(), nullptr, &sources[w], s, dt, aux_[w], hm_rows, mh_cols,
                  sys_rows, sys_cols, kcol);
    }
  }
}

void Propagator::resymmetrize() {
  {
    const double drift = 0.5 * hermiticity_defect(cov_.y);
    resym_max_ = std::max(resym_max_, drift);
    CMatrix sym = 0.5 * (cov_.y + cov_.y.adjoint());
    cov_.y = std::move(sym);
    cov_.stage = cov_.y;
  }
  for (auto& s : aux_) {
    const double drift = 0.5 * anti_hermiticity_defect(s.y);
    resym_max_ = std::max(resym_max_, drift);
    CMatrix anti = 0.5 * (s.y - s.y.adjoint());
    s.y = std::move(anti);
    s.stage = s.y;
  }
  ++resym_count_;
}

// ---------------------------------------------------------------------------

void check_invariants(const Propagator& prop, Diagnostics& diag) {
  const CMatrix& c = prop.covariance();
  if (!c.allFinite()) throw IntegrationError("non-finite covariance", prop.time());
  const double scale = std::max(max_abs(c), 1e-300);
  const double herm = hermiticity_defect(c) / scale;

  const CMatrix sym = 0.5 * (c + c.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw IntegrationError("eigenvalue check did not converge", prop.time());
  }
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();

  double anti = 0.0;
  for (Index w = 0; w < prop.window_count(); ++w) {
    const CMatrix& a = prop.auxiliary(w);
    if (!a.allFinite()) throw IntegrationError("non-finite auxiliary matrix", prop.time());
    anti = std::max(anti, anti_hermiticity_defect(a) / std::max(1.0, max_abs(a)));
  }

  if (diag.checks == 0) {
    diag.min_eigenvalue = lo;
    diag.max_eigenvalue = hi;
  } else {
    diag.min_eigenvalue = std::min(diag.min_eigenvalue, lo);
    diag.max_eigenvalue = std::max(diag.max_eigenvalue, hi);
  }
  diag.hermiticity = std::max(diag.hermiticity, herm);
  diag.anti_hermiticity = std::max(diag.anti_hermiticity, anti);
  diag.resymmetrization = prop.resymmetrization_correction();
  diag.resymmetrizations = prop.resymmetrizations();
  ++diag.checks;
}

Index grid_steps(double from, double to, double dt, const char* what) {
  const double x = (to - from) / dt;
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-6) {
    throw ConfigError(std::string(what) + " is not on the time grid (dt = " + std::to_string(dt) +
                      ")");
  }
  return static_cast<Index>(r);
}

namespace {

double residue(Complex z) { return std::abs(z.imag()) / std::max(1.0, std::abs(z.real())); }

}  // namespace

TraceRecorder::TraceRecorder(Propagator& prop, Index stride, Index check_every,
                             bool store_snapshots, bool strict)
    : prop_(&prop),
      stride_(stride),
      check_every_(check_every),
      store_snapshots_(store_snapshots),
      strict_(strict) {
  if (stride < 1) throw ConfigError("integration: stride must be >= 1");
  const AssembledModel& model = prop.model();
  trace_.model_hash = model.fingerprint();
  trace_.dt = prop.dt();
  trace_.stride = stride;
  for (Index r = 0; r < model.reservoir_count(); ++r) {
    trace_.currents.push_back({r, model.reservoir(r).label, {}});
  }
  record();
}

void TraceRecorder::open_windows(const std::vector<Index>& probes) {
  const AssembledModel& model = prop_->model();
  const bool sampled = last_sampled_ == prop_->steps_taken();
  for (Index p : probes) {
    const Index w = prop_->open_window(p);
    NoiseSeries series{p, model.reservoir(p).label, prop_->time(), trace_.times.size(), {}};
    if (sampled) {
      series.first_sample = trace_.times.size() - 1;
      series.values.push_back(prop_->noise(w).real());
    }
    trace_.noises.push_back(std::move(series));
  }
}

void TraceRecorder::advance() {
  prop_->step();
  record();
}

void TraceRecorder::finish() {
  if (last_checked_ != prop_->steps_taken()) check();
}

void TraceRecorder::record() {
  const Index k = prop_->steps_taken();
  if (k % stride_ == 0) {
    trace_.times.push_back(prop_->time());
    for (auto& cs : trace_.currents) {
      const Complex j = prop_->current(cs.reservoir);
      trace_.diagnostics.imaginary_residue =
          std::max(trace_.diagnostics.imaginary_residue, residue(j));
      cs.values.push_back(j.real());
    }
    for (std::size_t w = 0; w < trace_.noises.size(); ++w) {
      const Complex d = prop_->noise(static_cast<Index>(w));
      trace_.diagnostics.imaginary_residue =
          std::max(trace_.diagnostics.imaginary_residue, residue(d));
      trace_.noises[w].values.push_back(d.real());
    }
    last_sampled_ = k;
  }
  if (check_every_ > 0 && k % check_every_ == 0) check();
}

void TraceRecorder::check() {
  check_invariants(*prop_, trace_.diagnostics);
  last_checked_ = prop_->steps_taken();
  if (store_snapshots_) trace_.snapshots.push_back({prop_->time(), prop_->covariance()});
  if (strict_ &&
      (!trace_.diagnostics.within_bounds() || trace_.diagnostics.imaginary_residue > 1e-10)) {
    throw IntegrationError("state invariant violated", prop_->time());
  }
}

RunTrace evolve(const AssembledModel& model, const CMatrix& initial, const IntegratorConfig& config,
                const std::vector<Index>& probes) {
  if (!(config.dt > 0.0)) throw ConfigError("integration: dt must be > 0");
  if (config.stride < 1) throw ConfigError("integration: stride must be >= 1");
  if (!(config.t_max > config.t_start)) throw ConfigError("integration: t_max must exceed t_start");
  for (Index p : probes) model.reservoir(p);

  const Index total = grid_steps(config.t_start, config.t_max, config.dt, "t_max");
  std::vector<Index> opens;
  for (double t1 : config.window_starts) {
    if (t1 < config.t_start - 1e-12 || t1 > config.t_max + 1e-12) {
      throw ConfigError("window start " + std::to_string(t1) + " outside the integration span");
    }
    const Index k1 = grid_steps(config.t_start, t1, config.dt, "window start");
    if (k1 % config.stride != 0) {
      throw ConfigError("window start " + std::to_string(t1) +
                        " is not a multiple of the sampling stride");
    }
    opens.push_back(k1);
  }
  std::sort(opens.begin(), opens.end());

  PropagatorOptions opts;
  opts.dt = config.dt;
  opts.resymmetrize_every = config.resymmetrize_every;
  opts.mode = config.mode;
  Propagator prop(model, initial, config.t_start, opts);
  TraceRecorder recorder(prop, config.stride, config.check_every, config.store_snapshots,
                         config.strict);

  std::size_t next_open = 0;
  for (Index k = 0;; ++k) {
    while (next_open < opens.size() && opens[next_open] == k) {
      recorder.open_windows(probes);
      ++next_open;
    }
    if (k == total) break;
    recorder.advance();
  }
  recorder.finish();
  return recorder.take();
}

}  // namespace mesofcs
