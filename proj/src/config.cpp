#include "mesofcs/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace mesofcs {

// ---------------------------------------------------------------------------
// Source positions. nlohmann reports no positions for values, so the text is
// parsed a second time through a SAX handler whose input iterator publishes
// how far the lexer has read.

namespace {

struct CountingIterator {
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  const char** cursor = nullptr;

  reference operator*() const { return *p; }
  CountingIterator& operator++() {
    ++p;
    *cursor = p;
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIterator& o) const { return p == o.p; }
  bool operator!=(const CountingIterator& o) const { return p != o.p; }
};

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

class PositionHandler : public nlohmann::json_sax<Json> {
 public:
  PositionHandler(const char* begin, const char** cursor, std::vector<std::size_t> line_starts,
                  std::map<std::string, int>& lines)
      : begin_(begin), cursor_(cursor), line_starts_(std::move(line_starts)), lines_(lines) {}

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }

  bool start_object(std::size_t) override {
    frames_.push_back({false, 0, enter()});
    return true;
  }
  bool key(string_t& k) override {
    key_ = k;
    lines_[frames_.back().pointer + "/" + escape_token(k)] = current_line();
    return true;
  }
  bool end_object() override {
    frames_.pop_back();
    return true;
  }
  bool start_array(std::size_t) override {
    frames_.push_back({true, 0, enter()});
    return true;
  }
  bool end_array() override {
    frames_.pop_back();
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
    return false;
  }

 private:
  struct Frame {
    bool array;
    std::size_t next;
    std::string pointer;
  };

  // Records the line of the value starting now and returns its pointer.
  std::string enter() {
    std::string p;
    if (!frames_.empty()) {
      Frame& f = frames_.back();
      p = f.pointer + "/" + (f.array ? std::to_string(f.next++) : escape_token(key_));
    }
    lines_.emplace(p, current_line());
    return p;
  }

  bool value() {
    enter();
    return true;
  }

  int current_line() const {
    const std::size_t offset = static_cast<std::size_t>(*cursor_ - begin_);
    const std::size_t last = offset == 0 ? 0 : offset - 1;
    auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), last);
    return static_cast<int>(it - line_starts_.begin());
  }

  const char* begin_;
  const char** cursor_;
  std::vector<std::size_t> line_starts_;
  std::map<std::string, int>& lines_;
  std::vector<Frame> frames_;
  std::string key_;
};

}  // namespace

SourceMap SourceMap::build(std::string_view text) {
  SourceMap map;
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < text.size(); ++i)
    if (text[i] == '\n') starts.push_back(i + 1);
  const char* cursor = text.data();
  PositionHandler handler(text.data(), &cursor, std::move(starts), map.lines_);
  CountingIterator first{text.data(), &cursor};
  CountingIterator last{text.data() + text.size(), &cursor};
  Json::sax_parse(first, last, &handler);
  return map;
}

int SourceMap::line(const std::string& pointer) const {
  std::string p = pointer;
  for (;;) {
    auto it = lines_.find(p);
    if (it != lines_.end()) return it->second;
    if (p.empty()) return 0;
    p.erase(p.rfind('/'));
  }
}

ConfigDocument parse_document(const std::string& text, const std::string& origin) {
  ConfigDocument doc;
  doc.origin = origin;
  try {
    doc.json = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::string msg = e.what();
    const auto pos = msg.find("] ");
    throw ConfigError(origin + ": " + (pos == std::string::npos ? msg : msg.substr(pos + 2)));
  }
  doc.map = SourceMap::build(text);
  return doc;
}

ConfigDocument load_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str(), path.string());
}

// ---------------------------------------------------------------------------
// Schema reader.

namespace {

class Node {
 public:
  Node(const Json& j, std::string pointer, const ConfigDocument& doc)
      : j_(&j), pointer_(std::move(pointer)), doc_(&doc) {}

  const Json& json() const { return *j_; }
  const std::string& pointer() const { return pointer_; }

  [[noreturn]] void fail(const std::string& msg) const {
    const std::string full = doc_->root + pointer_;
    std::string where = doc_->origin;
    const int line = doc_->map.line(full);
    if (line > 0) where += ":" + std::to_string(line);
    throw ConfigError(where + ": " + (full.empty() ? "/" : full) + ": " + msg);
  }

  Node object() const {
    if (!j_->is_object()) fail("expected an object");
    return *this;
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    object();
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
        child(it.key()).fail("unknown key");
    }
  }

  bool has(const std::string& key) const { return object().j_->contains(key); }

  Node child(const std::string& key) const {
    return Node((*j_)[key], pointer_ + "/" + escape_token(key), *doc_);
  }

  Node at(const std::string& key) const {
    if (!has(key)) fail("missing required key '" + key + "'");
    return child(key);
  }

  std::optional<Node> find(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return child(key);
  }

  std::vector<Node> items() const {
    if (!j_->is_array()) fail("expected a list");
    std::vector<Node> out;
    for (std::size_t i = 0; i < j_->size(); ++i)
      out.emplace_back((*j_)[i], pointer_ + "/" + std::to_string(i), *doc_);
    return out;
  }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    const double x = j_->get<double>();
    if (!std::isfinite(x)) fail("expected a finite number");
    return x;
  }

  double positive() const {
    const double x = number();
    if (!(x > 0.0)) fail("must be > 0");
    return x;
  }

  Index integer(Index min) const {
    if (!j_->is_number_integer()) fail("expected an integer");
    const auto v = j_->get<std::int64_t>();
    if (v < min) fail("must be >= " + std::to_string(min));
    return static_cast<Index>(v);
  }

  std::string string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const Node& n : items()) out.push_back(n.number());
    return out;
  }

 private:
  const Json* j_;
  std::string pointer_;
  const ConfigDocument* doc_;
};

// Attaches the node's location to errors raised by model-level validation.
template <typename F>
auto guarded(const Node& node, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    node.fail(e.what());
  }
}

DriveWaveform parse_drive(const Node& n) {
  const std::string type = n.at("type").string();
  if (type == "constant") {
    n.allow({"type", "value"});
    return DriveWaveform::constant(n.find("value") ? n.at("value").number() : 0.0);
  }
  if (type == "cosine") {
    n.allow({"type", "amplitude", "omega"});
    const double amp = n.at("amplitude").number();
    const double omega = n.at("omega").positive();
    return DriveWaveform::cosine(amp, omega);
  }
  if (type == "pulse") {
    n.allow({"type", "amplitude", "center", "width"});
    const double amp = n.at("amplitude").number();
    const double center = n.at("center").number();
    const double width = n.at("width").positive();
    return DriveWaveform::pulse(amp, center, width);
  }
  if (type == "tabulated") {
    n.allow({"type", "times", "values"});
    auto times = n.at("times").numbers();
    auto values = n.at("values").numbers();
    return guarded(n, [&] { return DriveWaveform::tabulated(std::move(times), std::move(values)); });
  }
  n.child("type").fail("unknown drive type '" + type + "' (constant, cosine, pulse, tabulated)");
}

SystemConfig parse_system(const Node& n) {
  n.allow({"sites", "hopping", "onsite", "hamiltonian", "drive", "drive_signs"});
  SystemConfig s;
  if (auto h = n.find("hamiltonian")) {
    if (n.has("sites") || n.has("hopping") || n.has("onsite"))
      n.fail("'hamiltonian' excludes 'sites', 'hopping' and 'onsite'");
    const auto rows = h->items();
    if (rows.empty()) h->fail("hamiltonian must be non-empty");
    RMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = rows[i].numbers();
      if (row.size() != rows.size()) rows[i].fail("hamiltonian must be square");
      for (std::size_t j = 0; j < row.size(); ++j)
        m(static_cast<Index>(i), static_cast<Index>(j)) = row[j];
    }
    if (max_abs(m - m.transpose()) > 0.0) h->fail("hamiltonian must be symmetric");
    s.sites = m.rows();
    s.hamiltonian = m;
  } else {
    if (auto v = n.find("sites")) s.sites = v->integer(1);
    if (auto v = n.find("hopping")) s.hopping = v->number();
    if (auto v = n.find("onsite")) {
      s.onsite = v->numbers();
      if (static_cast<Index>(s.onsite.size()) != s.sites)
        v->fail("expected " + std::to_string(s.sites) + " onsite energies");
    }
  }
  if (auto d = n.find("drive")) s.drive = parse_drive(d->object());
  if (auto v = n.find("drive_signs")) {
    for (const Node& x : v->items()) {
      const Index sign = x.json().is_number_integer() ? x.json().get<Index>() : 0;
      if (sign < -1 || sign > 1 || !x.json().is_number_integer()) x.fail("drive sign must be -1, 0 or 1");
      s.drive_signs.push_back(static_cast<int>(sign));
    }
    if (static_cast<Index>(s.drive_signs.size()) != s.sites)
      v->fail("expected " + std::to_string(s.sites) + " drive signs");
  } else if (s.sites == 1) {
    s.drive_signs = {1};
  } else if (s.sites == 2) {
    s.drive_signs = {1, -1};
  } else {
    n.fail("missing required key 'drive_signs' (no default for " + std::to_string(s.sites) +
           " sites)");
  }
  return s;
}

SpectralDensity parse_spectral_density(const Node& n) {
  const std::string type = n.at("type").string();
  if (type == "flat") {
    n.allow({"type", "coupling", "half_bandwidth"});
    FlatBand b;
    b.coupling = n.at("coupling").number();
    if (b.coupling < 0.0) n.child("coupling").fail("must be >= 0");
    b.half_bandwidth = n.at("half_bandwidth").positive();
    return b;
  }
  if (type == "tabulated") {
    n.allow({"type", "energies", "values", "half_bandwidth"});
    TabulatedBand b;
    b.energies = n.at("energies").numbers();
    b.values = n.at("values").numbers();
    b.half_bandwidth = n.at("half_bandwidth").positive();
    SpectralDensity sd(b);
    guarded(n, [&] {
      sd.validate();
      return 0;
    });
    return sd;
  }
  n.child("type").fail("unknown spectral density type '" + type + "' (flat, tabulated)");
}

ReservoirSpec parse_reservoir(const Node& n, Index sites) {
  n.allow({"label", "site", "temperature", "chemical_potential", "spectral_density", "modes"});
  ReservoirSpec r;
  r.label = n.at("label").string();
  if (r.label.empty()) n.child("label").fail("label must be non-empty");
  const Index site = n.at("site").integer(1);
  if (site > sites) n.child("site").fail("site must be in 1.." + std::to_string(sites));
  r.site = site - 1;
  r.temperature = n.at("temperature").positive();
  r.chemical_potential = n.at("chemical_potential").number();
  r.spectral_density = parse_spectral_density(n.at("spectral_density").object());
  r.modes = n.at("modes").integer(2);
  return r;
}

IntegrationSettings parse_integration(const Node& n) {
  n.allow({"dt", "t_max", "initial", "checkpoint_in", "checkpoint_out", "check_every",
           "resymmetrize_every", "products", "strict"});
  IntegrationSettings s;
  if (auto v = n.find("dt")) s.dt = v->positive();
  if (auto v = n.find("t_max")) s.t_max = v->positive();
  if (auto v = n.find("initial")) {
    const std::string kind = v->string();
    if (kind == "empty") s.initial = InitialCovariance::empty;
    else if (kind == "leads_thermal") s.initial = InitialCovariance::leads_thermal;
    else if (kind == "half_filled") s.initial = InitialCovariance::half_filled;
    else v->fail("initial must be 'empty', 'leads_thermal' or 'half_filled'");
  }
  if (auto v = n.find("checkpoint_in")) s.checkpoint_in = v->string();
  if (auto v = n.find("checkpoint_out")) s.checkpoint_out = v->string();
  if (auto v = n.find("check_every")) s.check_every = v->integer(0);
  if (auto v = n.find("resymmetrize_every")) s.resymmetrize_every = v->integer(0);
  if (auto v = n.find("products")) {
    const std::string kind = v->string();
    if (kind == "structured") s.products = ProductMode::structured;
    else if (kind == "dense") s.products = ProductMode::dense;
    else v->fail("products must be 'structured' or 'dense'");
  }
  if (auto v = n.find("strict")) s.strict = v->boolean();
  return s;
}

CountingSettings parse_counting(const Node& n, const std::vector<ReservoirSpec>& reservoirs) {
  n.allow({"probes", "windows", "lc_tolerance", "periods", "min_periods", "convergence_tolerance",
           "period", "max_lc_periods"});
  CountingSettings s;
  if (auto v = n.find("probes")) {
    for (const Node& p : v->items()) {
      const std::string label = p.string();
      const bool known = std::any_of(reservoirs.begin(), reservoirs.end(),
                                     [&](const ReservoirSpec& r) { return r.label == label; });
      if (!known) p.fail("unknown reservoir '" + label + "'");
      s.probes.push_back(label);
    }
  }
  if (auto v = n.find("windows")) {
    if (v->json().is_string()) {
      if (v->string() != "auto") v->fail("windows must be \"auto\" or a list of start times");
    } else {
      s.auto_windows = false;
      s.windows = v->numbers();
      for (double t : s.windows)
        if (t < 0.0) v->fail("window starts must be >= 0");
    }
  }
  if (auto v = n.find("lc_tolerance")) {
    s.lc_tolerance = v->number();
    if (s.lc_tolerance < 0.0) v->fail("must be >= 0");
  }
  if (auto v = n.find("periods")) s.periods = v->integer(1);
  if (auto v = n.find("min_periods")) s.min_periods = v->integer(1);
  else s.min_periods = std::min(s.min_periods, s.periods);
  if (auto v = n.find("convergence_tolerance")) s.convergence_tolerance = v->positive();
  if (auto v = n.find("period")) s.period = v->positive();
  if (auto v = n.find("max_lc_periods")) s.max_lc_periods = v->integer(3);
  return s;
}

OutputSettings parse_output(const Node& n, const std::vector<ReservoirSpec>& reservoirs) {
  n.allow({"csv", "summary", "stride", "negate"});
  OutputSettings s;
  if (auto v = n.find("csv")) s.csv = v->string();
  if (auto v = n.find("summary")) s.summary = v->string();
  if (auto v = n.find("stride")) s.stride = v->integer(1);
  if (auto v = n.find("negate")) {
    for (const Node& p : v->items()) {
      const std::string label = p.string();
      const bool known = std::any_of(reservoirs.begin(), reservoirs.end(),
                                     [&](const ReservoirSpec& r) { return r.label == label; });
      if (!known) p.fail("unknown reservoir '" + label + "'");
      s.negate.push_back(label);
    }
  }
  return s;
}

}  // namespace

RunConfig parse_run_config(const ConfigDocument& doc) {
  const Node root(doc.json, "", doc);
  root.allow({"system", "reservoirs", "integration", "counting", "output"});
  RunConfig c;
  c.system = parse_system(root.at("system").object());
  const Node list = root.at("reservoirs");
  const auto items = list.items();
  if (items.empty()) list.fail("at least one reservoir is required");
  std::set<std::string> labels;
  for (const Node& r : items) {
    c.reservoirs.push_back(parse_reservoir(r.object(), c.system.sites));
    if (!labels.insert(c.reservoirs.back().label).second) r.child("label").fail("duplicate label");
  }
  Json empty = Json::object();
  const Node none(empty, "", doc);
  c.integration = parse_integration(root.has("integration") ? root.child("integration") : none);
  c.counting = parse_counting(root.has("counting") ? root.child("counting") : none, c.reservoirs);
  c.output = parse_output(root.has("output") ? root.child("output") : none, c.reservoirs);

  if (!c.counting.auto_windows && !c.integration.t_max && c.counting.windows.empty())
    root.fail("integration.t_max is required when no counting windows are given");
  if (c.counting.min_periods > c.counting.periods)
    root.fail("counting.min_periods exceeds counting.periods");
  guarded(root, [&] {
    c.system.spec().validate();
    return 0;
  });
  return c;
}

RunConfig parse_run_config(const Json& json) {
  ConfigDocument doc;
  doc.json = json;
  doc.origin = "<config>";
  return parse_run_config(doc);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(load_document(path));
}

SystemSpec SystemConfig::spec() const {
  SystemSpec s;
  if (hamiltonian) {
    s.static_hamiltonian = hamiltonian->cast<Complex>();
  } else {
    s.static_hamiltonian = CMatrix::Zero(sites, sites);
    for (Index i = 0; i + 1 < sites; ++i) {
      s.static_hamiltonian(i, i + 1) = -hopping;
      s.static_hamiltonian(i + 1, i) = -hopping;
    }
    for (Index i = 0; i < static_cast<Index>(onsite.size()); ++i)
      s.static_hamiltonian(i, i) = onsite[static_cast<std::size_t>(i)];
  }
  s.drive = drive;
  s.drive_signs = drive_signs;
  return s;
}

ModelSpec RunConfig::model() const { return {system.spec(), reservoirs}; }

double RunConfig::period() const {
  if (counting.period) return *counting.period;
  if (auto p = system.drive.period()) return *p;
  return 1.0;
}

namespace {

Json drive_json(const DriveWaveform& d) {
  switch (d.kind()) {
    case DriveWaveform::Kind::constant:
      return {{"type", "constant"}, {"value", d.amplitude()}};
    case DriveWaveform::Kind::cosine:
      return {{"type", "cosine"}, {"amplitude", d.amplitude()}, {"omega", d.omega()}};
    case DriveWaveform::Kind::pulse:
      return {{"type", "pulse"},
              {"amplitude", d.amplitude()},
              {"center", d.center()},
              {"width", d.width()}};
    case DriveWaveform::Kind::tabulated:
      return {{"type", "tabulated"}, {"times", d.times()}, {"values", d.values()}};
  }
  return {};
}

Json spectral_json(const SpectralDensity& sd) {
  if (const auto* flat = std::get_if<FlatBand>(&sd.band())) {
    return {{"type", "flat"}, {"coupling", flat->coupling}, {"half_bandwidth", flat->half_bandwidth}};
  }
  const auto& tab = std::get<TabulatedBand>(sd.band());
  return {{"type", "tabulated"},
          {"energies", tab.energies},
          {"values", tab.values},
          {"half_bandwidth", tab.half_bandwidth}};
}

const char* initial_name(InitialCovariance kind) {
  switch (kind) {
    case InitialCovariance::empty: return "empty";
    case InitialCovariance::leads_thermal: return "leads_thermal";
    case InitialCovariance::half_filled: return "half_filled";
  }
  return "empty";
}

}  // namespace

Json to_json(const RunConfig& c) {
  Json system = Json::object();
  if (c.system.hamiltonian) {
    Json rows = Json::array();
    const RMatrix& h = *c.system.hamiltonian;
    for (Index i = 0; i < h.rows(); ++i) {
      Json row = Json::array();
      for (Index j = 0; j < h.cols(); ++j) row.push_back(h(i, j));
      rows.push_back(row);
    }
    system["hamiltonian"] = rows;
  } else {
    system["sites"] = c.system.sites;
    system["hopping"] = c.system.hopping;
    if (!c.system.onsite.empty()) system["onsite"] = c.system.onsite;
  }
  system["drive"] = drive_json(c.system.drive);
  system["drive_signs"] = c.system.drive_signs;

  Json reservoirs = Json::array();
  for (const auto& r : c.reservoirs) {
    reservoirs.push_back({{"label", r.label},
                          {"site", r.site + 1},
                          {"temperature", r.temperature},
                          {"chemical_potential", r.chemical_potential},
                          {"spectral_density", spectral_json(r.spectral_density)},
                          {"modes", r.modes}});
  }

  const auto& in = c.integration;
  Json integration = {{"dt", in.dt},
                      {"initial", initial_name(in.initial)},
                      {"check_every", in.check_every},
                      {"resymmetrize_every", in.resymmetrize_every},
                      {"products", in.products == ProductMode::structured ? "structured" : "dense"},
                      {"strict", in.strict}};
  if (in.t_max) integration["t_max"] = *in.t_max;
  if (!in.checkpoint_in.empty()) integration["checkpoint_in"] = in.checkpoint_in;
  if (!in.checkpoint_out.empty()) integration["checkpoint_out"] = in.checkpoint_out;

  const auto& co = c.counting;
  Json counting = {{"probes", co.probes},
                   {"lc_tolerance", co.lc_tolerance},
                   {"periods", co.periods},
                   {"min_periods", co.min_periods},
                   {"convergence_tolerance", co.convergence_tolerance},
                   {"max_lc_periods", co.max_lc_periods}};
  if (co.auto_windows) counting["windows"] = "auto";
  else counting["windows"] = co.windows;
  if (co.period) counting["period"] = *co.period;

  Json output = {{"csv", c.output.csv},
                 {"summary", c.output.summary},
                 {"stride", c.output.stride},
                 {"negate", c.output.negate}};

  return {{"system", system},
          {"reservoirs", reservoirs},
          {"integration", integration},
          {"counting", counting},
          {"output", output}};
}

// ---------------------------------------------------------------------------
// Sweeps.

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : path) {
    if (ch == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

Json* resolve(Json& j, const std::string& path) {
  Json* node = &j;
  for (const std::string& part : split_path(path)) {
    if (part.empty()) return nullptr;
    if (node->is_object()) {
      if (!node->contains(part)) return nullptr;
      node = &(*node)[part];
    } else if (node->is_array()) {
      if (!std::all_of(part.begin(), part.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
        return nullptr;
      const std::size_t i = std::stoul(part);
      if (i >= node->size()) return nullptr;
      node = &(*node)[i];
    } else {
      return nullptr;
    }
  }
  return node;
}

}  // namespace

SweepConfig parse_sweep_config(const ConfigDocument& doc, const std::filesystem::path& base_dir) {
  const Node root(doc.json, "", doc);
  root.allow({"base", "parameter", "values", "threads", "table"});
  SweepConfig s;

  const Node base = root.at("base");
  if (base.json().is_string()) {
    std::filesystem::path p = base.string();
    if (p.is_relative()) p = base_dir / p;
    s.base = to_json(load_run_config(p));
  } else {
    ConfigDocument sub;
    sub.json = base.object().json();
    sub.origin = doc.origin;
    sub.map = doc.map;
    sub.root = doc.root + "/base";
    s.base = to_json(parse_run_config(sub));
  }

  const Node param = root.at("parameter");
  std::vector<Node> paths;
  if (param.json().is_array()) paths = param.items();
  else paths.push_back(param);
  if (paths.empty()) param.fail("at least one parameter path is required");
  for (const Node& p : paths) {
    const std::string path = p.string();
    const Json* target = resolve(s.base, path);
    if (target == nullptr) p.fail("parameter path '" + path + "' does not resolve");
    if (!target->is_number()) p.fail("parameter path '" + path + "' is not a numeric field");
    s.parameters.push_back(path);
  }
  s.values = root.at("values").numbers();
  if (auto v = root.find("threads")) s.threads = v->integer(1);
  if (auto v = root.find("table")) s.table = v->string();
  return s;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  return parse_sweep_config(load_document(path), path.parent_path());
}

Json apply_sweep_value(const SweepConfig& sweep, double value) {
  Json j = sweep.base;
  for (const std::string& path : sweep.parameters) {
    Json* target = resolve(j, path);
    if (target == nullptr) throw ConfigError("parameter path '" + path + "' does not resolve");
    if (target->is_number_integer() && value == std::floor(value)) {
      *target = static_cast<std::int64_t>(value);
    } else {
      *target = value;
    }
  }
  return j;
}

}  // namespace mesofcs
