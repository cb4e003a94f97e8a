#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mesofcs/common.hpp"
#include "mesofcs/dynamics.hpp"
#include "mesofcs/model.hpp"

namespace mesofcs {

using Json = nlohmann::json;

/// Line of every value in a JSON document, keyed by JSON pointer.
class SourceMap {
 public:
  SourceMap() = default;
  static SourceMap build(std::string_view text);

  /// Line of `pointer`, or of its nearest recorded ancestor; 0 if unknown.
  int line(const std::string& pointer) const;

 private:
  std::map<std::string, int> lines_;
};

struct ConfigDocument {
  Json json;
  SourceMap map;
  std::string origin;  // file name used in messages
  std::string root;    // pointer of `json` inside the mapped text
};

/// Parse errors carry "origin:line:column".
ConfigDocument parse_document(const std::string& text, const std::string& origin);
ConfigDocument load_document(const std::filesystem::path& path);

struct SystemConfig {
  Index sites = 2;
  double hopping = 1.0;  // nearest-neighbour -hopping
  std::vector<double> onsite;
  std::optional<RMatrix> hamiltonian;  // replaces sites/hopping/onsite when given
  DriveWaveform drive;
  std::vector<int> drive_signs;

  SystemSpec spec() const;
};

struct IntegrationSettings {
  double dt = 0.01;
  std::optional<double> t_max;
  InitialCovariance initial = InitialCovariance::empty;
  std::string checkpoint_in;
  std::string checkpoint_out;
  Index check_every = 100;
  Index resymmetrize_every = 1000;
  ProductMode products = ProductMode::structured;
  bool strict = false;
};

struct CountingSettings {
  std::vector<std::string> probes;  // empty: every reservoir
  bool auto_windows = true;
  std::vector<double> windows;
  double lc_tolerance = 1e-4;
  Index periods = 20;  // S_inf horizon after t1
  Index min_periods = 10;
  double convergence_tolerance = 1e-3;
  std::optional<double> period;  // required for non-periodic drives with a horizon
  Index max_lc_periods = 200;
};

struct OutputSettings {
  std::string csv = "trace.csv";
  std::string summary = "summary.json";
  Index stride = 1;
  std::vector<std::string> negate;  // extra -J columns
};

struct RunConfig {
  SystemConfig system;
  std::vector<ReservoirSpec> reservoirs;
  IntegrationSettings integration;
  CountingSettings counting;
  OutputSettings output;

  ModelSpec model() const;
  /// Period used for limit-cycle detection and averaging.
  double period() const;
};

RunConfig parse_run_config(const ConfigDocument& doc);
RunConfig parse_run_config(const Json& json);
RunConfig load_run_config(const std::filesystem::path& path);

/// Every field made explicit; parse_run_config(to_json(c)) reproduces c.
Json to_json(const RunConfig& config);

struct SweepConfig {
  Json base;  // normalized RunConfig document
  std::vector<std::string> parameters;  // dotted paths, all set to the same value
  std::vector<double> values;
  Index threads = 1;
  std::string table = "sweep.csv";
};

SweepConfig parse_sweep_config(const ConfigDocument& doc,
                               const std::filesystem::path& base_dir = {});
SweepConfig load_sweep_config(const std::filesystem::path& path);

/// base with every parameter path set to `value`.
Json apply_sweep_value(const SweepConfig& sweep, double value);

}  // namespace mesofcs
