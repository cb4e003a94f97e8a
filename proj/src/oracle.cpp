#include "mesofcs/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mesofcs/dynamics.hpp"
#include "mesofcs/leads.hpp"

namespace mesofcs {

namespace {

SparseReal diagonal_matrix(const RVector& d) {
  SparseReal m(d.size(), d.size());
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < d.size(); ++i)
    if (d(i) != 0.0) t.emplace_back(i, i, d(i));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// Tr(op rho) touching only the nonzeros of op.
Complex trace_product(const SparseReal& op, const CMatrix& rho) {
  Complex out = 0.0;
  for (Index k = 0; k < op.outerSize(); ++k)
    for (SparseReal::InnerIterator it(op, k); it; ++it) out += it.value() * rho(it.col(), it.row());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

FockSpace::FockSpace(Index modes) : modes_(modes) {
  if (modes < 1 || modes > kMaxOracleModes) {
    throw ConfigError("oracle: " + std::to_string(modes) + " modes outside [1, " +
                      std::to_string(kMaxOracleModes) + "]");
  }
  const Index dim = dimension();
  for (Index j = 0; j < modes; ++j) {
    std::vector<Eigen::Triplet<double>> t;
    for (Index s = 0; s < dim; ++s) {
      const auto bits = static_cast<unsigned long long>(s);
      if (!(bits & (1ULL << j))) continue;
      const int below = std::popcount(bits & ((1ULL << j) - 1ULL));
      t.emplace_back(static_cast<Index>(bits ^ (1ULL << j)), s, below % 2 ? -1.0 : 1.0);
    }
    SparseReal a(dim, dim);
    a.setFromTriplets(t.begin(), t.end());
    annihilators_.push_back(std::move(a));
  }
}

RVector FockSpace::occupation(Index j) const {
  RVector n(dimension());
  for (Index s = 0; s < dimension(); ++s) n(s) = (static_cast<unsigned long long>(s) >> j) & 1ULL;
  return n;
}

// ---------------------------------------------------------------------------

FockSpaceModel::FockSpaceModel(const AssembledModel& model)
    : model_(&model), space_(model.dimension()) {
  const Index l = model.system_size();
  const Index dim = space_.dimension();

  hopping_.resize(static_cast<std::size_t>(l));
  for (Index i = 0; i < l; ++i)
    for (Index j = 0; j < l; ++j)
      hopping_[static_cast<std::size_t>(i)].push_back(space_.creator(i) * space_.annihilator(j));

  RVector energy = RVector::Zero(dim);
  decay_ = RVector::Zero(dim);
  for (std::size_t r = 0; r < model.leads().size(); ++r) {
    const auto& lead = model.leads()[r];
    const auto& block = model.reservoirs()[r];
    SparseReal coupling(dim, dim);
    for (Index k = 0; k < block.size; ++k) {
      const Index q = block.offset + k;
      const RVector n = space_.occupation(q);
      energy += lead.energies(k) * n;
      coupling += block.coupling(k) * SparseReal(space_.creator(block.site) * space_.annihilator(q));

      const double loss = lead.damping(k) * (1.0 - lead.occupation(k));
      const double gain = lead.damping(k) * lead.occupation(k);
      if (loss > 0.0) {
        jumps_.push_back({space_.annihilator(q), loss});
        decay_ += loss * n;
      }
      if (gain > 0.0) {
        jumps_.push_back({space_.creator(q), gain});
        decay_ += gain * (RVector::Ones(dim) - n);
      }
    }
    SparseReal adjoint = coupling.transpose();
    odd_.push_back(coupling - adjoint);
    even_.push_back(coupling + adjoint);
    couplings_.push_back(std::move(coupling));
  }
  lead_energy_ = diagonal_matrix(energy);
}

SparseComplex FockSpaceModel::system_hamiltonian(double t) const {
  const CMatrix hs = build_system_hamiltonian(model_->system(), t);
  SparseComplex h(dimension(), dimension());
  for (Index i = 0; i < hs.rows(); ++i)
    for (Index j = 0; j < hs.cols(); ++j)
      if (hs(i, j) != Complex(0.0))
        h += hs(i, j) * hopping_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].cast<Complex>();
  return h;
}

SparseComplex FockSpaceModel::static_hamiltonian(double chi, Index counted) const {
  model_->reservoir(counted);
  SparseComplex h = lead_energy_.cast<Complex>();
  for (std::size_t r = 0; r < couplings_.size(); ++r) {
    const SparseComplex a = couplings_[r].cast<Complex>();
    const SparseComplex ad = SparseComplex(a.adjoint());
    if (static_cast<Index>(r) == counted && chi != 0.0) {
      const Complex phase = std::exp(Complex(0.0, -0.5 * chi));
      h += phase * a + std::conj(phase) * ad;
    } else {
      h += a + ad;
    }
  }
  return h;
}

SparseComplex FockSpaceModel::hamiltonian(double t, double chi, Index counted) const {
  return system_hamiltonian(t) + static_hamiltonian(chi, counted);
}

CMatrix FockSpaceModel::product_state(const RVector& occupations) const {
  if (occupations.size() != space_.modes()) throw ConfigError("product_state: wrong mode count");
  const Index dim = dimension();
  CMatrix rho = CMatrix::Zero(dim, dim);
  for (Index s = 0; s < dim; ++s) {
    double p = 1.0;
    for (Index j = 0; j < space_.modes(); ++j) {
      const bool occ = (static_cast<unsigned long long>(s) >> j) & 1ULL;
      p *= occ ? occupations(j) : 1.0 - occupations(j);
    }
    rho(s, s) = p;
  }
  return rho;
}

CMatrix FockSpaceModel::state_from_covariance(const CMatrix& c) const {
  if (c.rows() != space_.modes() || c.cols() != space_.modes()) {
    throw ConfigError("state_from_covariance: wrong shape");
  }
  CMatrix off = c;
  off.diagonal().setZero();
  if (max_abs(off) > 1e-14) {
    throw ConfigError("oracle: only diagonal (product) initial covariances are supported");
  }
  return product_state(c.diagonal().real());
}

CMatrix FockSpaceModel::covariance(const CMatrix& rho) const {
  const Index m = space_.modes();
  CMatrix c(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      const SparseReal op = space_.creator(j) * space_.annihilator(i);
      c(i, j) = trace_product(op, rho);
    }
  return c;
}

// ---------------------------------------------------------------------------

TiltedGenerator::TiltedGenerator(const FockSpaceModel& model, double chi, Index counted)
    : model_(&model),
      chi_(chi),
      counted_(counted),
      static_plus_(model.static_hamiltonian(chi, counted)),
      static_minus_(model.static_hamiltonian(-chi, counted)) {
  for (const auto& jump : model.jumps()) jumps_.emplace_back(jump.op.transpose(), jump.rate);
}

CMatrix TiltedGenerator::apply(double t, const CMatrix& rho) const {
  const SparseComplex hs = model_->system_hamiltonian(t);
  CMatrix comm = hs * rho;
  comm.noalias() -= rho * hs;
  comm.noalias() += static_plus_ * rho;
  comm.noalias() -= rho * static_minus_;
  CMatrix out = (-kI) * comm;
  const RVector& decay = model_->decay();
  for (Index j = 0; j < rho.cols(); ++j)
    for (Index i = 0; i < rho.rows(); ++i) out(i, j) -= 0.5 * (decay(i) + decay(j)) * rho(i, j);
  const auto& jumps = model_->jumps();
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    const CMatrix left = jumps[k].op * rho;
    out.noalias() += jumps[k].rate * (left * jumps_[k].first);
  }
  return out;
}

CMatrix TiltedGenerator::superoperator(double t) const {
  if (model_->space().modes() > 5) {
    throw ConfigError("superoperator: dense form limited to 5 modes");
  }
  const Index d = model_->dimension();
  CMatrix super(d * d, d * d);
  CMatrix basis = CMatrix::Zero(d, d);
  for (Index b = 0; b < d; ++b)
    for (Index a = 0; a < d; ++a) {
      basis(a, b) = 1.0;
      const CMatrix col = apply(t, basis);
      super.col(a + b * d) = Eigen::Map<const CVector>(col.data(), d * d);
      basis(a, b) = 0.0;
    }
  return super;
}

CMatrix TiltedGenerator::first_derivative(const CMatrix& rho) const {
  const SparseReal& k = model_->coupling_odd(counted_);
  return -0.5 * (k * rho + rho * k);
}

CMatrix TiltedGenerator::second_derivative(const CMatrix& rho) const {
  const SparseReal& v = model_->coupling_even(counted_);
  return Complex(0.0, 0.25) * (v * rho - rho * v);
}

// ---------------------------------------------------------------------------

namespace {

Index step_count(double from, double to, double dt) {
  if (!(dt > 0.0)) throw ConfigError("oracle: dt must be > 0");
  if (to < from) throw ConfigError("oracle: end time precedes start");
  return static_cast<Index>(std::ceil((to - from) / dt - 1e-9));
}

}  // namespace

TiltedState evolve_tilted(const TiltedGenerator& generator, TiltedState state, double t_end,
                          double dt) {
  const Index steps = step_count(state.time, t_end, dt);
  if (steps == 0) return state;
  const double h = (t_end - state.time) / static_cast<double>(steps);
  const double t0 = state.time;
  auto rhs = [&](double t, const CMatrix& rho) { return generator.apply(t, rho); };
  for (Index k = 0; k < steps; ++k) {
    state.rho = rk4_step(rhs, t0 + static_cast<double>(k) * h, h, state.rho);
  }
  state.time = t_end;
  return state;
}

TiltedState open_tilted(const CMatrix& rho, double chi, double start) {
  return {rho, chi, start, start};
}

CMatrix evolve_state(const FockSpaceModel& model, const CMatrix& rho, double t0, double t,
                     double dt) {
  TiltedGenerator gen(model, 0.0, 0);
  return evolve_tilted(gen, open_tilted(rho, 0.0, t0), t, dt).rho;
}

Complex characteristic_function(const FockSpaceModel& model, Index counted, const CMatrix& rho,
                                double t0, double t, double chi, double dt) {
  TiltedGenerator gen(model, chi, counted);
  return evolve_tilted(gen, open_tilted(rho, chi, t0), t, dt).characteristic();
}

Complex joint_characteristic_function(const FockSpaceModel& model, Index counted,
                                      const CMatrix& rho, double t0, double t1, double t2,
                                      double chi1, double chi2, double dt) {
  if (!(t0 <= t1 && t1 <= t2)) throw ConfigError("joint CF: need t0 <= t1 <= t2");
  TiltedGenerator first(model, chi1, counted);
  TiltedState s = evolve_tilted(first, open_tilted(rho, chi1, t0), t1, dt);
  TiltedGenerator second(model, chi2, counted);
  return evolve_tilted(second, s, t2, dt).characteristic();
}

// ---------------------------------------------------------------------------

namespace {

struct Stencil {
  Complex d1, d2;
  double e1, e2;
};

// Five-point first and second derivatives at 0 from f(-2h), f(-h), f(0), f(h), f(2h);
// errors are the gaps to the three-point forms.
Stencil differentiate(const std::array<Complex, 5>& f, double h) {
  Stencil s;
  s.d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
  s.d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
  const Complex d1_3 = (f[3] - f[1]) / (2.0 * h);
  const Complex d2_3 = (f[3] - 2.0 * f[2] + f[1]) / (h * h);
  s.e1 = std::abs(s.d1 - d1_3);
  s.e2 = std::abs(s.d2 - d2_3);
  return s;
}

constexpr std::array<double, 5> kStencilNodes = {-2.0, -1.0, 0.0, 1.0, 2.0};

}  // namespace

Cumulants cumulants_from_cf(const std::array<Complex, 5>& g, double h) {
  if (!(h > 0.0)) throw ConfigError("cumulants_from_cf: step must be > 0");
  if (std::abs(g[2] - 1.0) > 1e-8) {
    throw ValidationError("cumulants_from_cf: G(0) = " + std::to_string(g[2].real()) +
                          " differs from 1");
  }
  std::array<Complex, 5> lg;
  for (std::size_t i = 0; i < 5; ++i) lg[i] = std::log(g[i]);
  const Stencil s = differentiate(lg, h);
  return {-kI * s.d1, -s.d2, s.e1, s.e2};
}

CumulantSeries cf_cumulant_path(const FockSpaceModel& model, Index counted, const CMatrix& rho0,
                                double t0, double t_end, const OracleRunOptions& options) {
  const double h = options.chi_step;
  const Index steps = step_count(t0, t_end, options.dt);
  std::vector<TiltedGenerator> gens;
  std::vector<CMatrix> rho(5, rho0);
  for (double node : kStencilNodes) gens.emplace_back(model, node * h, counted);

  CumulantSeries out;
  for (Index k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * options.dt;
    if (k % options.stride == 0 || k == steps) {
      std::array<Complex, 5> f;
      for (std::size_t i = 0; i < 5; ++i) f[i] = gens[i].apply(t, rho[i]).trace() / rho[i].trace();
      const Stencil s = differentiate(f, h);
      const Complex j = -kI * s.d1;
      const Complex d = -s.d2;
      out.times.push_back(t);
      out.current.push_back(j.real());
      out.noise.push_back(d.real());
      out.max_imaginary = std::max({out.max_imaginary, std::abs(j.imag()), std::abs(d.imag())});
      out.truncation_error = std::max({out.truncation_error, s.e1, s.e2});
    }
    if (k == steps) break;
    for (std::size_t i = 0; i < 5; ++i) {
      auto rhs = [&](double tt, const CMatrix& r) { return gens[i].apply(tt, r); };
      rho[i] = rk4_step(rhs, t, options.dt, rho[i]);
    }
  }
  return out;
}

namespace {

struct RhoSigma {
  CMatrix rho;
  CMatrix sigma;
};

RhoSigma operator+(const RhoSigma& a, const RhoSigma& b) { return {a.rho + b.rho, a.sigma + b.sigma}; }
RhoSigma operator*(double s, const RhoSigma& a) { return {s * a.rho, s * a.sigma}; }
[[maybe_unused]] bool all_finite(const RhoSigma& s) { return s.rho.allFinite() && s.sigma.allFinite(); }

}  // namespace

CumulantSeries sigma_cumulant_path(const FockSpaceModel& model, Index counted, const CMatrix& rho0,
                                   double t0, double t_end, const OracleRunOptions& options) {
  const Index steps = step_count(t0, t_end, options.dt);
  const TiltedGenerator gen(model, 0.0, counted);
  auto rhs = [&](double t, const RhoSigma& s) {
    const CMatrix lp = gen.first_derivative(s.rho);
    const Complex tr = lp.trace();
    return RhoSigma{gen.apply(t, s.rho), CMatrix(gen.apply(t, s.sigma) + lp - tr * s.rho)};
  };

  RhoSigma state{rho0, CMatrix::Zero(rho0.rows(), rho0.cols())};
  CumulantSeries out;
  for (Index k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * options.dt;
    if (k % options.stride == 0 || k == steps) {
      const Complex j = -kI * gen.first_derivative(state.rho).trace();
      const Complex d = -gen.second_derivative(state.rho).trace() -
                        2.0 * gen.first_derivative(state.sigma).trace();
      out.times.push_back(t);
      out.current.push_back(j.real());
      out.noise.push_back(d.real());
      out.max_imaginary = std::max({out.max_imaginary, std::abs(j.imag()), std::abs(d.imag())});
    }
    if (k == steps) break;
    state = rk4_step(rhs, t, options.dt, state);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Grid {
  std::vector<double> chi;
  std::vector<double> charges;
};

Grid make_grid(const DistributionOptions& options) {
  const Index m = options.points;
  if (m < 2 || !std::has_single_bit(static_cast<unsigned long long>(m))) {
    throw ConfigError("distribution: grid size must be a power of two >= 2");
  }
  const double span = options.lattice == ChargeLattice::integer ? 2.0 * kPi : 4.0 * kPi;
  const double unit = options.lattice == ChargeLattice::integer ? 1.0 : 0.5;
  Grid g;
  for (Index k = 0; k < m; ++k) {
    g.chi.push_back(-0.5 * span + span * static_cast<double>(k) / static_cast<double>(m));
    g.charges.push_back(unit * static_cast<double>(k - m / 2));
  }
  return g;
}

void check_normalization(double total, const DistributionOptions& options) {
  if (std::abs(total - 1.0) > options.normalization_tolerance) {
    throw ValidationError("distribution: total probability " + std::to_string(total) +
                          " differs from 1");
  }
}

}  // namespace

Distribution distribution(const std::function<Complex(double)>& cf,
                          const DistributionOptions& options) {
  const Grid grid = make_grid(options);
  const std::size_t m = grid.chi.size();
  std::vector<Complex> g(m);
  for (std::size_t k = 0; k < m; ++k) g[k] = cf(grid.chi[k]);

  Distribution out;
  out.charges = grid.charges;
  for (double q : grid.charges) {
    Complex p = 0.0;
    for (std::size_t k = 0; k < m; ++k) p += std::exp(Complex(0.0, -q * grid.chi[k])) * g[k];
    p /= static_cast<double>(m);
    out.probabilities.push_back(p.real());
    out.max_imaginary = std::max(out.max_imaginary, std::abs(p.imag()));
  }
  check_normalization(out.total(), options);
  return out;
}

double Distribution::total() const {
  double s = 0.0;
  for (double p : probabilities) s += p;
  return s;
}

double Distribution::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < charges.size(); ++i) s += charges[i] * probabilities[i];
  return s / total();
}

double Distribution::variance() const {
  const double mu = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < charges.size(); ++i) {
    s += (charges[i] - mu) * (charges[i] - mu) * probabilities[i];
  }
  return s / total();
}

JointDistribution joint_distribution(const std::function<Complex(double, double)>& cf,
                                     const DistributionOptions& options) {
  const Grid grid = make_grid(options);
  const Index m = static_cast<Index>(grid.chi.size());
  CMatrix g(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) g(a, b) = cf(grid.chi[static_cast<std::size_t>(a)], grid.chi[static_cast<std::size_t>(b)]);

  // Separable inversion: P = F g F^T with F(n, k) = exp(-i q_n chi_k) / m.
  CMatrix f(m, m);
  for (Index n = 0; n < m; ++n)
    for (Index k = 0; k < m; ++k)
      f(n, k) = std::exp(Complex(0.0, -grid.charges[static_cast<std::size_t>(n)] *
                                          grid.chi[static_cast<std::size_t>(k)])) /
                static_cast<double>(m);
  const CMatrix p = f * g * f.transpose();

  JointDistribution out;
  out.charges = grid.charges;
  out.probabilities = p.real();
  out.max_imaginary = max_abs(p.imag());
  check_normalization(out.total(), options);
  return out;
}

double JointDistribution::total() const { return probabilities.sum(); }

double JointDistribution::mean(int axis) const {
  const Eigen::Map<const RVector> q(charges.data(), static_cast<Index>(charges.size()));
  const RVector marginal = axis == 0 ? RVector(probabilities.rowwise().sum())
                                     : RVector(probabilities.colwise().sum().transpose());
  return q.dot(marginal) / total();
}

double JointDistribution::variance(int axis) const {
  const Eigen::Map<const RVector> q(charges.data(), static_cast<Index>(charges.size()));
  const RVector marginal = axis == 0 ? RVector(probabilities.rowwise().sum())
                                     : RVector(probabilities.colwise().sum().transpose());
  const double mu = mean(axis);
  return (q.array() - mu).square().matrix().dot(marginal) / total();
}

double JointDistribution::covariance() const {
  const Eigen::Map<const RVector> q(charges.data(), static_cast<Index>(charges.size()));
  const RVector d0 = q.array() - mean(0);
  const RVector d1 = q.array() - mean(1);
  return d0.dot(probabilities * d1) / total();
}

double JointDistribution::total_variance() const {
  double mu = 0.0, s = 0.0;
  const Index m = probabilities.rows();
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b)
      mu += (charges[static_cast<std::size_t>(a)] + charges[static_cast<std::size_t>(b)]) *
            probabilities(a, b);
  mu /= total();
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) {
      const double x = charges[static_cast<std::size_t>(a)] + charges[static_cast<std::size_t>(b)] - mu;
      s += x * x * probabilities(a, b);
    }
  return s / total();
}

}  // namespace mesofcs
