#include <doctest.h>

#include <string>

#include "mesofcs/config.hpp"

using namespace mesofcs;

namespace {

const char* kMinimal = R"({
  "system": {"sites": 2, "hopping": 1.0,
             "drive": {"type": "cosine", "amplitude": 40, "omega": 5}},
  "reservoirs": [
    {"label": "L", "site": 1, "temperature": 0.1, "chemical_potential": 24,
     "spectral_density": {"type": "flat", "coupling": 0.5, "half_bandwidth": 100},
     "modes": 100},
    {"label": "R", "site": 2, "temperature": 0.1, "chemical_potential": -24,
     "spectral_density": {"type": "flat", "coupling": 0.5, "half_bandwidth": 100},
     "modes": 100}
  ]
})";

std::string error_of(const std::string& text) {
  try {
    parse_run_config(parse_document(text, "run.json"));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("minimal configuration gets defaults") {
  const RunConfig c = parse_run_config(parse_document(kMinimal, "run.json"));
  CHECK(c.reservoirs.size() == 2);
  CHECK(c.reservoirs[1].site == 1);
  CHECK(c.integration.dt == 0.01);
  CHECK(c.counting.auto_windows);
  CHECK(c.period() == doctest::Approx(2.0 * kPi / 5.0));
  CHECK(c.system.drive_signs == std::vector<int>{1, -1});
  CHECK(c.output.csv == "trace.csv");
}

TEST_CASE("normalized echo reproduces the configuration") {
  const RunConfig c = parse_run_config(parse_document(kMinimal, "run.json"));
  const Json echo = to_json(c);
  CHECK(to_json(parse_run_config(echo)) == echo);
  CHECK(assemble(parse_run_config(echo).model()).fingerprint() == assemble(c.model()).fingerprint());
}

TEST_CASE("errors point at the offending line") {
  std::string text = kMinimal;
  text.replace(text.find("\"modes\": 100}"), 13, "\"modez\": 100}");
  const std::string unknown = error_of(text);
  CHECK(contains(unknown, "run.json:7:"));
  CHECK(contains(unknown, "unknown key"));

  text = kMinimal;
  text.replace(text.find("\"temperature\": 0.1"), 18, "\"temperature\": -1");
  const std::string negative = error_of(text);
  CHECK(contains(negative, "run.json:5:"));
  CHECK(contains(negative, "/reservoirs/0/temperature"));

  CHECK(contains(error_of(R"({"system": {"sites": 2}})"), "reservoirs"));
  CHECK(contains(error_of("{\n  \"system\": {,\n}"), "run.json: parse error at line 2"));
}

TEST_CASE("drive forms") {
  Json j = Json::parse(kMinimal);
  j["system"]["drive"] = {{"type", "pulse"}, {"amplitude", 2.0}, {"center", 3.0}, {"width", 1.0}};
  CHECK(parse_run_config(j).system.drive(3.0) == doctest::Approx(2.0));
  j["system"]["drive"] = {{"type", "tabulated"}, {"times", {0.0, 1.0}}, {"values", {0.0, 4.0}}};
  CHECK(parse_run_config(j).system.drive(0.5) == doctest::Approx(2.0));
  j["system"]["drive"] = {{"type", "square"}};
  CHECK_THROWS_AS(parse_run_config(j), ConfigError);
}

TEST_CASE("sweep configuration") {
  const std::string text = std::string(R"({"base": )") + kMinimal +
                           R"(, "parameter": "system.drive.amplitude", "values": [0, 4, 8], "threads": 2})";
  const SweepConfig s = parse_sweep_config(parse_document(text, "sweep.json"));
  CHECK(s.values.size() == 3);
  CHECK(s.threads == 2);
  CHECK(apply_sweep_value(s, 4.0)["system"]["drive"]["amplitude"] == 4);

  SweepConfig modes = s;
  modes.parameters = {"reservoirs.0.modes"};
  CHECK(apply_sweep_value(modes, 200.0)["reservoirs"][0]["modes"].is_number_integer());

  const std::string bad = std::string(R"({"base": )") + kMinimal +
                          R"(, "parameter": "system.drive.type", "values": [1]})";
  CHECK_THROWS_AS(parse_sweep_config(parse_document(bad, "sweep.json")), ConfigError);

  const std::string indexed = std::string(R"({"base": )") + kMinimal +
                              R"(, "parameter": ["reservoirs.0.temperature", "reservoirs.1.temperature"], "values": []})";
  const SweepConfig e = parse_sweep_config(parse_document(indexed, "sweep.json"));
  CHECK(e.values.empty());
  CHECK(e.parameters.size() == 2);
}
