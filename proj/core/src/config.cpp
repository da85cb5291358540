#include "chronoframe/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace chronoframe {

using nlohmann::json;

namespace {

[[noreturn]] void unknown_field(const std::string& path) {
  throw SimError(Err::UnknownField, path);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) unknown_field(path + "/" + key);
  }
}

std::vector<std::vector<double>> parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array()) unknown_field(path);
  std::vector<std::vector<double>> out;
  for (const auto& row : j) {
    out.push_back(row.get<std::vector<double>>());
  }
  return out;
}

json matrix_json(const std::vector<std::vector<double>>& m) {
  json j = json::array();
  for (const auto& row : m) j.push_back(row);
  return j;
}

ScenarioConfig parse_document(const json& doc) {
  check_keys(doc, "", {"name", "experiment", "clocks", "system", "hamiltonian", "profile",
                       "kicks", "sweep", "seed", "params", "options"});
  ScenarioConfig c;
  c.name = doc.value("name", std::string("scenario"));
  if (!doc.contains("experiment")) {
    throw SimError(Err::ConfigError, "missing required field 'experiment'");
  }
  c.experiment = doc.at("experiment").get<std::string>();
  static const std::set<std::string> experiments = {"signaling", "naive_demo", "reversed_order",
                                                    "sync_scan", "switch", "two_frame"};
  if (!experiments.count(c.experiment)) {
    throw SimError(Err::ConfigError, "unknown experiment '" + c.experiment + "'");
  }

  if (doc.contains("clocks")) {
    int i = 0;
    for (const auto& jc : doc.at("clocks")) {
      const std::string path = "clocks/" + std::to_string(i++);
      check_keys(jc, path, {"label", "d", "dt", "direction"});
      ClockConfig cc;
      cc.label = jc.value("label", std::string("C") + std::to_string(i));
      cc.d = jc.value("d", 64);
      cc.dt = jc.value("dt", 0.0);
      cc.direction = jc.value("direction", 1);
      if (cc.d < 2) throw SimError(Err::InvalidDimension, path + ": clock d must be >= 2");
      c.clocks.push_back(std::move(cc));
    }
  } else {
    c.clocks.push_back(ClockConfig{"C1", 64, 0.0, 1});
  }

  if (doc.contains("system")) {
    int i = 0;
    for (const auto& jf : doc.at("system")) {
      const std::string path = "system/" + std::to_string(i++);
      check_keys(jf, path, {"label", "dim"});
      c.system.push_back(FactorConfig{jf.value("label", std::string("S")), jf.value("dim", 2)});
    }
  } else {
    c.system = {{"A", 2}, {"B", 2}};
  }

  if (c.experiment == "switch" || c.experiment == "sync_scan") {
    c.hamiltonian.preset = "zero";  // overridden below when the field is given
  }
  if (doc.contains("hamiltonian")) {
    const auto& jh = doc.at("hamiltonian");
    check_keys(jh, "hamiltonian", {"preset", "matrix_re", "matrix_im", "file"});
    c.hamiltonian.preset = jh.value("preset", c.hamiltonian.preset);
    static const std::set<std::string> presets = {"appendix_b_free", "appendix_b_interacting",
                                                  "zero", "custom"};
    if (!presets.count(c.hamiltonian.preset)) {
      throw SimError(Err::ConfigError, "unknown hamiltonian preset '" + c.hamiltonian.preset + "'");
    }
    if (jh.contains("matrix_re")) c.hamiltonian.custom_re = parse_matrix(jh.at("matrix_re"), "hamiltonian/matrix_re");
    if (jh.contains("matrix_im")) c.hamiltonian.custom_im = parse_matrix(jh.at("matrix_im"), "hamiltonian/matrix_im");
    c.hamiltonian.file = jh.value("file", std::string());
  }

  if (doc.contains("profile")) {
    const auto& jp = doc.at("profile");
    check_keys(jp, "profile", {"kind", "center", "sigma", "offset"});
    c.profile.kind = jp.value("kind", std::string("gaussian"));
    static const std::set<std::string> kinds = {"kronecker", "gaussian", "bimodal"};
    if (!kinds.count(c.profile.kind)) {
      throw SimError(Err::ConfigError, "unknown profile kind '" + c.profile.kind + "'");
    }
    c.profile.center = jp.value("center", 0.0);
    c.profile.sigma = jp.value("sigma", 0.0);  // 0 resolves to the experiment default
    c.profile.offset = jp.value("offset", 0.0);
    if (c.profile.sigma < 0.0) {
      throw SimError(Err::InvalidWidth, "profile/sigma must not be negative");
    }
  } else {
    c.profile = ProfileConfig{"gaussian", 0.0, 0.0, 0.0};  // sigma resolved per experiment
  }

  if (doc.contains("kicks")) {
    int i = 0;
    for (const auto& jk : doc.at("kicks")) {
      const std::string path = "kicks/" + std::to_string(i++);
      check_keys(jk, path, {"clock", "tau", "generator", "matrix_re", "matrix_im", "targets"});
      KickConfig kc;
      kc.clock = jk.value("clock", c.clocks.front().label);
      kc.tau = jk.value("tau", 0.0);
      kc.generator = jk.value("generator", std::string("hadamard_dilation"));
      static const std::set<std::string> gens = {"hadamard_dilation", "y_measurement_dilation",
                                                 "pauli_x", "pauli_y", "pauli_z", "custom"};
      if (!gens.count(kc.generator)) {
        throw SimError(Err::ConfigError, path + ": unknown generator '" + kc.generator + "'");
      }
      if (jk.contains("matrix_re")) kc.custom_re = parse_matrix(jk.at("matrix_re"), path + "/matrix_re");
      if (jk.contains("matrix_im")) kc.custom_im = parse_matrix(jk.at("matrix_im"), path + "/matrix_im");
      if (jk.contains("targets")) kc.targets = jk.at("targets").get<std::vector<std::string>>();
      c.kicks.push_back(std::move(kc));
    }
  }

  if (doc.contains("sweep")) {
    const auto& js = doc.at("sweep");
    check_keys(js, "sweep", {"parameter", "values", "start", "stop", "count"});
    SweepConfig s;
    s.parameter = js.value("parameter", std::string("t_f"));
    if (js.contains("values")) {
      s.values = js.at("values").get<std::vector<double>>();
    } else if (js.contains("start") && js.contains("stop") && js.contains("count")) {
      const double start = js.at("start").get<double>();
      const double stop = js.at("stop").get<double>();
      const int count = js.at("count").get<int>();
      if (count < 1) throw SimError(Err::ConfigError, "sweep/count must be positive");
      for (int k = 0; k < count; ++k) {
        s.values.push_back(count == 1 ? start : start + (stop - start) * k / (count - 1));
      }
    } else {
      throw SimError(Err::ConfigError, "sweep needs either values or start/stop/count");
    }
    c.sweep = std::move(s);
  }

  c.seed = doc.value("seed", 0ULL);

  if (doc.contains("params")) {
    for (const auto& [key, value] : doc.at("params").items()) {
      if (!value.is_number()) unknown_field("params/" + key);
      c.params.emplace_back(key, value.get<double>());
    }
  }
  if (doc.contains("options")) {
    for (const auto& [key, value] : doc.at("options").items()) {
      if (!value.is_string()) unknown_field("options/" + key);
      c.options.emplace_back(key, value.get<std::string>());
    }
  }
  return c;
}

void validate_grid(const ScenarioConfig& c) {
  // Kick times must land on their clock's grid; profile guard gaps must fit.
  for (const auto& k : c.kicks) {
    const ClockConfig* clk = nullptr;
    for (const auto& cc : c.clocks) {
      if (cc.label == k.clock) clk = &cc;
    }
    if (!clk) throw SimError(Err::UnknownFactor, "kick references unknown clock '" + k.clock + "'");
    const double dt = clk->dt > 0.0 ? clk->dt : 2.0 * std::numbers::pi / clk->d;
    const double r = k.tau / dt;
    if (std::abs(r - std::round(r)) > 1e-9) {
      throw SimError(Err::OffGridTime,
                     "kicks: tau = " + format_double(k.tau) + " is off the grid (dt = " +
                         format_double(dt) + ")");
    }
  }
  if (c.profile.kind == "bimodal" && c.profile.offset < 3.0 * c.profile.sigma) {
    throw SimError(Err::GuardGapViolation, "profile: bimodal offset below 3 sigma");
  }
  if (c.profile.sigma > 0.0) {
    const ClockConfig& cc = c.clocks.back();
    const double period = cc.d * (cc.dt > 0.0 ? cc.dt : 2.0 * std::numbers::pi / cc.d);
    const double span = c.profile.sigma * 3.0 +
                        (c.profile.kind == "bimodal" ? c.profile.offset : 0.0);
    if (std::abs(c.profile.center) + span > period / 2.0) {
      throw SimError(Err::GuardGapViolation, "profile support reaches the wrap-around");
    }
  }
}

}  // namespace

double ScenarioConfig::param(const std::string& key, double fallback) const {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  return fallback;
}

std::string ScenarioConfig::option(const std::string& key, const std::string& fallback) const {
  for (const auto& [k, v] : options) {
    if (k == key) return v;
  }
  return fallback;
}

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SimError(Err::ConfigError, std::string("malformed JSON: ") + e.what());
  }
  ScenarioConfig c = parse_document(doc);
  validate_grid(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw SimError(Err::ConfigError, "cannot open config file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& c) {
  json doc;
  doc["name"] = c.name;
  doc["experiment"] = c.experiment;
  doc["clocks"] = json::array();
  for (const auto& cc : c.clocks) {
    doc["clocks"].push_back({{"label", cc.label}, {"d", cc.d}, {"dt", cc.dt},
                             {"direction", cc.direction}});
  }
  doc["system"] = json::array();
  for (const auto& f : c.system) {
    doc["system"].push_back({{"label", f.label}, {"dim", f.dim}});
  }
  doc["hamiltonian"] = {{"preset", c.hamiltonian.preset}};
  if (!c.hamiltonian.custom_re.empty()) {
    doc["hamiltonian"]["matrix_re"] = matrix_json(c.hamiltonian.custom_re);
  }
  if (!c.hamiltonian.custom_im.empty()) {
    doc["hamiltonian"]["matrix_im"] = matrix_json(c.hamiltonian.custom_im);
  }
  if (!c.hamiltonian.file.empty()) doc["hamiltonian"]["file"] = c.hamiltonian.file;
  doc["profile"] = {{"kind", c.profile.kind},
                    {"center", c.profile.center},
                    {"sigma", c.profile.sigma},
                    {"offset", c.profile.offset}};
  doc["kicks"] = json::array();
  for (const auto& k : c.kicks) {
    json jk = {{"clock", k.clock}, {"tau", k.tau}, {"generator", k.generator}};
    if (!k.custom_re.empty()) jk["matrix_re"] = matrix_json(k.custom_re);
    if (!k.custom_im.empty()) jk["matrix_im"] = matrix_json(k.custom_im);
    if (!k.targets.empty()) jk["targets"] = k.targets;
    doc["kicks"].push_back(std::move(jk));
  }
  if (c.sweep) {
    doc["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
  }
  doc["seed"] = c.seed;
  if (!c.params.empty()) {
    json jp = json::object();
    for (const auto& [k, v] : c.params) jp[k] = v;
    doc["params"] = std::move(jp);
  }
  if (!c.options.empty()) {
    json jo = json::object();
    for (const auto& [k, v] : c.options) jo[k] = v;
    doc["options"] = std::move(jo);
  }
  return doc.dump(2);
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) {
    throw SimError(Err::Internal, "number formatting failed");
  }
  return std::string(buf, ptr);
}

}  // namespace chronoframe
