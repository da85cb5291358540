#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chronoframe/clock.hpp"

namespace chronoframe {

// Declarative scenario description, parsed from a JSON document. Field and
// preset names are part of the CLI contract.
struct ClockConfig {
  std::string label;
  int d = 64;
  double dt = 0.0;  // 0 means 2*pi/d
  int direction = 1;
};

struct FactorConfig {
  std::string label;
  int dim = 2;
};

struct HamiltonianConfig {
  std::string preset = "appendix_b_interacting";  // or appendix_b_free | zero | custom
  std::vector<std::vector<double>> custom_re;     // row-major real part
  std::vector<std::vector<double>> custom_im;     // row-major imaginary part
  std::string file;                               // custom matrix file (JSON)
};

struct KickConfig {
  std::string clock;
  double tau = 0.0;
  std::string generator = "hadamard_dilation";
  // presets: hadamard_dilation | y_measurement_dilation | pauli_x|pauli_y|pauli_z | custom
  std::vector<std::vector<double>> custom_re;
  std::vector<std::vector<double>> custom_im;
  std::vector<std::string> targets;  // factor labels the generator acts on
};

struct ProfileConfig {
  std::string kind = "gaussian";  // kronecker | gaussian | bimodal
  double center = 0.0;
  double sigma = 0.0;
  double offset = 0.0;
};

struct SweepConfig {
  std::string parameter;  // e.g. "t_f"
  std::vector<double> values;
};

struct ScenarioConfig {
  std::string name;
  std::string experiment;  // signaling | naive_demo | reversed_order | sync_scan | switch | two_frame
  std::vector<ClockConfig> clocks;
  std::vector<FactorConfig> system;
  HamiltonianConfig hamiltonian;
  ProfileConfig profile;
  std::vector<KickConfig> kicks;
  std::optional<SweepConfig> sweep;
  std::uint64_t seed = 0;

  // Experiment-scoped scalar and string parameters (t_i, t_f, tau_a, ...).
  std::vector<std::pair<std::string, double>> params;
  std::vector<std::pair<std::string, std::string>> options;

  double param(const std::string& key, double fallback) const;
  std::string option(const std::string& key, const std::string& fallback) const;
};

// Parse and validate one scenario document. Unknown fields raise
// UnknownField with the JSON path; grid and guard-gap violations raise
// OffGridTime / GuardGapViolation.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

// Canonical serialization; parse(serialize(c)) == c.
std::string serialize_config(const ScenarioConfig& config);

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

// Shortest round-trip decimal formatting used for every number we emit.
std::string format_double(double x);

}  // namespace chronoframe
