#pragma once

#include <iosfwd>
#include <map>

#include "chronoframe/causality.hpp"
#include "chronoframe/config.hpp"

namespace chronoframe {

// One executed sweep point: flat numeric columns plus nested diagnostics.
struct ResultRecord {
  std::string scenario;
  std::vector<std::pair<std::string, double>> values;        // CSV columns, in order
  std::vector<std::pair<std::string, std::string>> strings;  // verdicts, orders
  std::map<std::string, double> diagnostics;                 // norms, residuals, checks
  double wall_time_ms = 0.0;
};

struct RunOutput {
  std::vector<ResultRecord> records;
  bool invariants_ok = true;
  std::vector<std::string> failures;
};

struct RunSettings {
  int check_level = 0;   // 0 fast, 1 full oracle cross-checks
  int clock_dim = 0;     // overrides the config when > 0
  std::uint64_t seed = 0;  // overrides the config when nonzero
  int max_threads = 0;   // 0: hardware default, capped by CHRONOFRAME_THREADS
};

// Execute the configured experiment over its sweep grid. Pure per point;
// points run on a worker pool and are collected in config order.
RunOutput run(const ScenarioConfig& config, const RunSettings& settings = {});

// Flat table with one row per record; fixed column set per experiment.
void write_csv(const RunOutput& out, std::ostream& os);
// Nested document including diagnostics and wall times.
void write_json(const RunOutput& out, const ScenarioConfig& config, std::ostream& os);

}  // namespace chronoframe
