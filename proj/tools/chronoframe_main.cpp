#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "chronoframe/runner.hpp"

namespace {

// 0 ok, 1 invariant failure, 2 config error.
enum ExitCode { kOk = 0, kInvariantFailure = 1, kConfigError = 2 };

bool is_config_error(chronoframe::Err code) {
  using chronoframe::Err;
  switch (code) {
    case Err::ConfigError:
    case Err::UnknownField:
    case Err::OffGridTime:
    case Err::GuardGapViolation:
    case Err::InvalidWidth:
    case Err::InvalidDimension:
    case Err::UnknownFactor:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chronoframe: relational-clock dynamics scenarios"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  int clock_dim = 0;
  std::uint64_t seed = 0;
  std::string check_level = "fast";

  CLI::App* run_cmd = app.add_subcommand("run", "execute a scenario config");
  run_cmd->add_option("config", config_path, "path to the scenario JSON")->required();
  run_cmd->add_option("--out", out_path, "output path (default: stdout)");
  run_cmd->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--clock-dim", clock_dim, "override the primary clock dimension");
  run_cmd->add_option("--seed", seed, "seed for randomized fixtures");
  run_cmd->add_option("--check-level", check_level, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}));

  CLI11_PARSE(app, argc, argv);

  chronoframe::ScenarioConfig config;
  try {
    config = chronoframe::load_config(config_path);
  } catch (const chronoframe::SimError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  chronoframe::RunSettings settings;
  settings.check_level = check_level == "full" ? 1 : 0;
  settings.clock_dim = clock_dim;
  settings.seed = seed;

  chronoframe::RunOutput output;
  try {
    output = chronoframe::run(config, settings);
  } catch (const chronoframe::SimError& e) {
    if (is_config_error(e.code())) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    }
    std::cerr << "run failed: " << e.what() << "\n";
    return kInvariantFailure;
  }

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) {
      std::cerr << "cannot open output file '" << out_path << "'\n";
      return kConfigError;
    }
    os = &file;
  }
  if (format == "json") {
    chronoframe::write_json(output, config, *os);
  } else {
    chronoframe::write_csv(output, *os);
  }

  if (!output.invariants_ok) {
    for (const auto& failure : output.failures) {
      std::cerr << "invariant failure: " << failure << "\n";
    }
    return kInvariantFailure;
  }
  return kOk;
}
