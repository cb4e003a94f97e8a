#include "mesofcs/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "mesofcs/leads.hpp"

namespace mesofcs {

double fermi_occupation(double energy, double temperature, double chemical_potential) {
  if (!std::isfinite(energy) || !std::isfinite(temperature) ||
      !std::isfinite(chemical_potential)) {
    throw ConfigError("fermi_occupation: non-finite input");
  }
  if (!(temperature > 0.0)) throw ConfigError("fermi_occupation: temperature must be > 0");
  const double x = (energy - chemical_potential) / temperature;
  // exp(-|x|) never overflows; pick the branch that keeps it small.
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

// ---------------------------------------------------------------------------
// DriveWaveform

DriveWaveform DriveWaveform::constant(double value) {
  if (!std::isfinite(value)) throw ConfigError("constant drive: value must be finite");
  DriveWaveform w;
  w.kind_ = Kind::constant;
  w.amplitude_ = value;
  return w;
}

DriveWaveform DriveWaveform::cosine(double amplitude, double omega) {
  if (!std::isfinite(amplitude)) throw ConfigError("cosine drive: amplitude must be finite");
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw ConfigError("cosine drive: omega must be > 0");
  }
  DriveWaveform w;
  w.kind_ = Kind::cosine;
  w.amplitude_ = amplitude;
  w.omega_ = omega;
  return w;
}

DriveWaveform DriveWaveform::pulse(double amplitude, double center, double width) {
  if (!std::isfinite(amplitude) || !std::isfinite(center)) {
    throw ConfigError("pulse drive: amplitude and center must be finite");
  }
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw ConfigError("pulse drive: width must be > 0");
  }
  DriveWaveform w;
  w.kind_ = Kind::pulse;
  w.amplitude_ = amplitude;
  w.center_ = center;
  w.width_ = width;
  return w;
}

DriveWaveform DriveWaveform::tabulated(std::vector<double> times, std::vector<double> values) {
  if (times.empty() || times.size() != values.size()) {
    throw ConfigError("tabulated drive: times and values must be non-empty and equal length");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i])) {
      throw ConfigError("tabulated drive: non-finite sample");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ConfigError("tabulated drive: times must be strictly increasing");
    }
  }
  DriveWaveform w;
  w.kind_ = Kind::tabulated;
  w.times_ = std::move(times);
  w.values_ = std::move(values);
  return w;
}

double DriveWaveform::operator()(double t) const {
  switch (kind_) {
    case Kind::constant:
      return amplitude_;
    case Kind::cosine:
      return amplitude_ * std::cos(omega_ * t);
    case Kind::pulse: {
      const double x = (t - center_) / width_;
      return amplitude_ * std::exp(-0.5 * x * x);
    }
    case Kind::tabulated: {
      if (t <= times_.front()) return values_.front();
      if (t >= times_.back()) return values_.back();
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const auto hi = static_cast<std::size_t>(it - times_.begin());
      const std::size_t lo = hi - 1;
      const double s = (t - times_[lo]) / (times_[hi] - times_[lo]);
      return values_[lo] + s * (values_[hi] - values_[lo]);
    }
  }
  return 0.0;
}

std::optional<double> DriveWaveform::period() const {
  if (kind_ == Kind::cosine) return 2.0 * kPi / omega_;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// SystemSpec

void SystemSpec::validate() const {
  const Index l = static_hamiltonian.rows();
  if (l < 1 || static_hamiltonian.cols() != l) {
    throw ConfigError("system: static Hamiltonian must be a non-empty square matrix");
  }
  if (!static_hamiltonian.allFinite()) throw ConfigError("system: non-finite Hamiltonian entry");
  if (hermiticity_defect(static_hamiltonian) > 0.0) {
    throw ConfigError("system: static Hamiltonian is not Hermitian");
  }
  if (!drive_signs.empty() && static_cast<Index>(drive_signs.size()) != l) {
    throw ConfigError("system: drive_signs must have one entry per site");
  }
  for (int s : drive_signs) {
    if (s < -1 || s > 1) throw ConfigError("system: drive signs must be -1, 0 or +1");
  }
}

SystemSpec SystemSpec::two_site(double hopping, DriveWaveform drive) {
  SystemSpec spec;
  spec.static_hamiltonian = CMatrix::Zero(2, 2);
  spec.static_hamiltonian(0, 1) = -hopping;
  spec.static_hamiltonian(1, 0) = -hopping;
  spec.drive = std::move(drive);
  spec.drive_signs = {+1, -1};
  return spec;
}

CMatrix build_system_hamiltonian(const SystemSpec& spec, double t) {
  if (spec.builder) {
    CMatrix h = spec.builder(t);
    if (h.rows() != spec.sites() || h.cols() != spec.sites()) {
      throw ConfigError("system builder returned a matrix of the wrong size");
    }
    if (hermiticity_defect(h) > 1e-12 * std::max(1.0, max_abs(h))) {
      throw ConfigError("system builder returned a non-Hermitian matrix");
    }
    return h;
  }
  CMatrix h = spec.static_hamiltonian;
  if (!spec.drive_signs.empty()) {
    const double half_field = 0.5 * spec.drive(t);
    for (Index j = 0; j < h.rows(); ++j) {
      h(j, j) += half_field * static_cast<double>(spec.drive_signs[static_cast<std::size_t>(j)]);
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// SpectralDensity / ReservoirSpec

double SpectralDensity::operator()(double omega) const {
  if (const auto* flat = std::get_if<FlatBand>(&band_)) {
    return std::abs(omega) <= flat->half_bandwidth ? flat->coupling : 0.0;
  }
  const auto& tab = std::get<TabulatedBand>(band_);
  if (std::abs(omega) > tab.half_bandwidth) return 0.0;
  if (omega <= tab.energies.front()) return tab.values.front();
  if (omega >= tab.energies.back()) return tab.values.back();
  const auto it = std::upper_bound(tab.energies.begin(), tab.energies.end(), omega);
  const auto hi = static_cast<std::size_t>(it - tab.energies.begin());
  const std::size_t lo = hi - 1;
  const double s = (omega - tab.energies[lo]) / (tab.energies[hi] - tab.energies[lo]);
  return tab.values[lo] + s * (tab.values[hi] - tab.values[lo]);
}

double SpectralDensity::half_bandwidth() const {
  return std::visit([](const auto& b) { return b.half_bandwidth; }, band_);
}

void SpectralDensity::validate() const {
  if (const auto* flat = std::get_if<FlatBand>(&band_)) {
    if (!(flat->half_bandwidth > 0.0) || !std::isfinite(flat->half_bandwidth)) {
      throw ConfigError("flat band: half_bandwidth must be > 0");
    }
    if (!(flat->coupling >= 0.0) || !std::isfinite(flat->coupling)) {
      throw ConfigError("flat band: coupling must be >= 0");
    }
    return;
  }
  const auto& tab = std::get<TabulatedBand>(band_);
  if (!(tab.half_bandwidth > 0.0)) throw ConfigError("tabulated band: half_bandwidth must be > 0");
  if (tab.energies.empty() || tab.energies.size() != tab.values.size()) {
    throw ConfigError("tabulated band: energies and values must be non-empty and equal length");
  }
  for (std::size_t i = 0; i < tab.energies.size(); ++i) {
    if (!std::isfinite(tab.energies[i]) || !std::isfinite(tab.values[i])) {
      throw ConfigError("tabulated band: non-finite sample");
    }
    if (tab.values[i] < 0.0) throw ConfigError("tabulated band: J(omega) must be >= 0");
    if (i > 0 && !(tab.energies[i] > tab.energies[i - 1])) {
      throw ConfigError("tabulated band: energies must be strictly increasing");
    }
  }
}

void ReservoirSpec::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("reservoir '" + label + "': temperature must be > 0");
  }
  if (!std::isfinite(chemical_potential)) {
    throw ConfigError("reservoir '" + label + "': chemical potential must be finite");
  }
  if (modes < 2) throw ConfigError("reservoir '" + label + "': need at least 2 lead modes");
  spectral_density.validate();
}

// ---------------------------------------------------------------------------
// AssembledModel

AssembledModel::AssembledModel(SystemSpec system, std::vector<LeadDiscretization> leads)
    : system_(std::move(system)), leads_(std::move(leads)) {
  system_.validate();
  const Index l = system_.sites();

  std::set<std::string> labels;
  Index lead_total = 0;
  for (const auto& lead : leads_) {
    const auto& r = lead.reservoir;
    if (r.site < 0 || r.site >= l) {
      throw ConfigError("reservoir '" + r.label + "': site index " + std::to_string(r.site + 1) +
                        " outside [1, " + std::to_string(l) + "]");
    }
    if (!labels.insert(r.label).second) {
      throw ConfigError("duplicate reservoir label '" + r.label + "'");
    }
    lead_total += lead.size();
  }

  dimension_ = l + lead_total;
  lead_energy_.resize(lead_total);
  lead_coupling_.resize(lead_total);
  lead_site_.resize(static_cast<std::size_t>(lead_total));
  damping_ = RVector::Zero(dimension_);
  injection_ = RVector::Zero(dimension_);

  Index offset = l;
  for (const auto& lead : leads_) {
    const Index n = lead.size();
    ReservoirBlock block;
    block.label = lead.reservoir.label;
    block.site = lead.reservoir.site;
    block.offset = offset;
    block.size = n;
    block.coupling = lead.coupling;
    blocks_.push_back(block);

    lead_energy_.segment(offset - l, n) = lead.energies;
    lead_coupling_.segment(offset - l, n) = lead.coupling;
    std::fill_n(lead_site_.begin() + (offset - l), n, lead.reservoir.site);
    damping_.segment(offset, n) = lead.damping;
    injection_.segment(offset, n) = lead.damping.cwiseProduct(lead.occupation);
    offset += n;
  }
}

const ReservoirBlock& AssembledModel::reservoir(Index id) const {
  if (id < 0 || id >= reservoir_count()) {
    throw ConfigError("unknown reservoir id " + std::to_string(id));
  }
  return blocks_[static_cast<std::size_t>(id)];
}

Index AssembledModel::find_reservoir(const std::string& label) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].label == label) return static_cast<Index>(i);
  }
  throw ConfigError("unknown reservoir '" + label + "'");
}

ArrowheadHamiltonian AssembledModel::hamiltonian(double t) const {
  ArrowheadHamiltonian h;
  h.system = build_system_hamiltonian(system_, t);
  h.lead_energy = lead_energy_;
  h.lead_coupling = lead_coupling_;
  h.lead_site = lead_site_;
  h.blocks.reserve(blocks_.size());
  for (const auto& b : blocks_) h.blocks.push_back({b.site, b.offset, b.size});
  return h;
}

CMatrix AssembledModel::dense_hamiltonian(double t) const { return hamiltonian(t).dense(); }

CMatrix AssembledModel::drift(double t) const {
  CMatrix w = kI * dense_hamiltonian(t);
  w.diagonal() += (0.5 * damping_).cast<Complex>();
  return w;
}

RVector AssembledModel::thermal_occupations() const {
  RVector f = RVector::Zero(dimension_);
  for (std::size_t i = 0; i < leads_.size(); ++i) {
    f.segment(blocks_[i].offset, blocks_[i].size) = leads_[i].occupation;
  }
  return f;
}

void AssembledModel::inject_counting_sign_error(Index reservoir_id) {
  reservoir(reservoir_id);
  blocks_[static_cast<std::size_t>(reservoir_id)].coupling *= -1.0;
}

RMatrix AssembledModel::counting_matrix(Index reservoir_id) const {
  const auto& b = reservoir(reservoir_id);
  RMatrix g = RMatrix::Zero(dimension_, dimension_);
  for (Index k = 0; k < b.size; ++k) {
    g(b.site, b.offset + k) = b.coupling(k);
    g(b.offset + k, b.site) = -b.coupling(k);
  }
  return g;
}

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 1099511628211ULL;
    }
  }
  void value(double x) { bytes(&x, sizeof x); }
  void value(std::int64_t x) { bytes(&x, sizeof x); }
  void text(const std::string& s) {
    value(static_cast<std::int64_t>(s.size()));
    bytes(s.data(), s.size());
  }
  template <typename Derived>
  void values(const Eigen::DenseBase<Derived>& m) {
    for (Index i = 0; i < m.size(); ++i) {
      const auto v = m(i);
      if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Complex>) {
        value(v.real());
        value(v.imag());
      } else {
        value(static_cast<double>(v));
      }
    }
  }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ULL;
};

}  // namespace

std::uint64_t AssembledModel::fingerprint() const {
  Fnv1a h;
  h.value(static_cast<std::int64_t>(dimension_));
  h.values(system_.static_hamiltonian);
  const auto& d = system_.drive;
  h.value(static_cast<std::int64_t>(d.kind()));
  h.value(d.amplitude());
  h.value(d.omega());
  h.value(d.center());
  h.value(d.width());
  for (double x : d.times()) h.value(x);
  for (double x : d.values()) h.value(x);
  for (int s : system_.drive_signs) h.value(static_cast<std::int64_t>(s));
  h.value(static_cast<std::int64_t>(system_.builder ? 1 : 0));
  for (const auto& b : blocks_) {
    h.text(b.label);
    h.value(static_cast<std::int64_t>(b.site));
    h.value(static_cast<std::int64_t>(b.size));
  }
  h.values(lead_energy_);
  h.values(lead_coupling_);
  h.values(damping_);
  h.values(injection_);
  return h.digest();
}

AssembledModel assemble(const SystemSpec& system, std::vector<LeadDiscretization> leads) {
  return AssembledModel(system, std::move(leads));
}

AssembledModel assemble(const ModelSpec& spec) {
  std::vector<LeadDiscretization> leads;
  leads.reserve(spec.reservoirs.size());
  for (const auto& r : spec.reservoirs) leads.push_back(discretize(r));
  return AssembledModel(spec.system, std::move(leads));
}

}  // namespace mesofcs
