#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <sstream>

#include "chronoframe/runner.hpp"

using namespace chronoframe;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("minimal config parses with defaults") {
  ScenarioConfig c = parse_config(R"({"experiment": "signaling"})");
  CHECK(c.clocks.size() == 1);
  CHECK(c.clocks[0].d == 64);
  CHECK(c.clocks[0].dt == 0.0);  // resolved to 2*pi/d at run time
  CHECK(c.system.size() == 2);
  CHECK(c.hamiltonian.preset == "appendix_b_interacting");
}

TEST_CASE("unknown fields are rejected with their path") {
  try {
    parse_config(R"({"experiment": "signaling", "clocks": [{"label": "C1", "dd": 3}]})");
    FAIL("expected UnknownField");
  } catch (const SimError& e) {
    CHECK(e.code() == Err::UnknownField);
    CHECK(std::string(e.what()).find("clocks/0/dd") != std::string::npos);
  }
}

TEST_CASE("off-grid kick times are rejected with the offending value") {
  try {
    parse_config(R"({"experiment": "signaling",
                     "kicks": [{"clock": "C1", "tau": 0.1, "generator": "pauli_x"}]})");
    FAIL("expected OffGridTime");
  } catch (const SimError& e) {
    CHECK(e.code() == Err::OffGridTime);
    CHECK(std::string(e.what()).find("0.1") != std::string::npos);
  }
}

TEST_CASE("guard gap violations are caught at parse time") {
  CHECK_THROWS_AS(parse_config(R"({"experiment": "switch",
                                   "profile": {"kind": "bimodal", "sigma": 0.4, "offset": 0.5}})"),
                  SimError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "naive_demo",
                                   "profile": {"kind": "gaussian", "sigma": 2.0}})"),
                  SimError);
}

TEST_CASE("config round trips through serialization") {
  ScenarioConfig c = load_config(std::string(CHRONOFRAME_REPO_DIR) + "/configs/appendix_b_signaling.json");
  ScenarioConfig back = parse_config(serialize_config(c));
  CHECK(back == c);
  ScenarioConfig sw = load_config(std::string(CHRONOFRAME_REPO_DIR) + "/configs/switch_bimodal.json");
  CHECK(parse_config(serialize_config(sw)) == sw);
}

TEST_CASE("malformed json yields a config error") {
  CHECK_THROWS_AS(parse_config("{nope"), SimError);
  try {
    parse_config("{}");
  } catch (const SimError& e) {
    CHECK(e.code() == Err::ConfigError);  // missing experiment
  }
}

TEST_CASE("signaling sweep reproduces the canonical row") {
  ScenarioConfig c = parse_config(R"({
    "name": "row-check",
    "experiment": "signaling",
    "hamiltonian": {"preset": "appendix_b_interacting"},
    "sweep": {"parameter": "t_f", "values": [0.7853981633974483]}
  })");
  RunOutput out = run(c);
  REQUIRE(out.invariants_ok);
  REQUIRE(out.records.size() == 1);
  const auto& values = out.records[0].values;
  CHECK(values[0].first == "t_f");
  CHECK(values[1].first == "p_plus_y_none");
  CHECK(values[2].first == "p_plus_y_hadamard");
  CHECK(values[1].second == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(values[2].second) < 1e-12);

  std::ostringstream csv;
  write_csv(out, csv);
  std::string text = csv.str();
  CHECK(text.find("t_f,p_plus_y_none,p_plus_y_hadamard") == 0);
  CHECK(text.find("0.7853981633974483,") != std::string::npos);
}

TEST_CASE("csv output is byte-identical across runs") {
  ScenarioConfig c = load_config(std::string(CHRONOFRAME_REPO_DIR) + "/configs/appendix_b_signaling.json");
  std::ostringstream first, second;
  write_csv(run(c), first);
  write_csv(run(c), second);
  CHECK(first.str() == second.str());
  CHECK(first.str().find("t_f,") == 0);
}

TEST_CASE("random interventions honor the seed") {
  ScenarioConfig c = load_config(std::string(CHRONOFRAME_REPO_DIR) + "/configs/no_signaling_random.json");
  RunOutput a = run(c);
  RunOutput b = run(c);
  REQUIRE(a.invariants_ok);
  std::ostringstream sa, sb;
  write_csv(a, sa);
  write_csv(b, sb);
  CHECK(sa.str() == sb.str());

  RunSettings reseeded;
  reseeded.seed = 99;
  RunOutput other = run(c, reseeded);
  std::ostringstream so;
  write_csv(other, so);
  CHECK(so.str() != sa.str());  // different unitaries, same schema

  // All of them no-signaling on the non-interacting hamiltonian.
  for (const auto& rec : a.records) {
    for (const auto& [k, v] : rec.values) {
      if (k == "tv_distance") CHECK(v < 1e-10);
    }
  }
}

TEST_CASE("sync scan emits the norm ratio column") {
  ScenarioConfig c = load_config(std::string(CHRONOFRAME_REPO_DIR) + "/configs/sync_scan.json");
  RunOutput out = run(c);
  REQUIRE(out.invariants_ok);
  REQUIRE(out.records.size() == 2);
  double ratio = 0.0;
  for (const auto& [k, v] : out.records[1].values) {
    if (k == "norm_ratio") ratio = v;
  }
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("switch run emits branch weights and indefinite orders in json") {
  ScenarioConfig c = load_config(std::string(CHRONOFRAME_REPO_DIR) + "/configs/switch_bimodal.json");
  RunOutput out = run(c);
  REQUIRE(out.invariants_ok);
  std::ostringstream js;
  write_json(out, c, js);
  std::string text = js.str();
  CHECK(text.find("branch_weights") != std::string::npos);
  CHECK(text.find("indefinite") != std::string::npos);
}

TEST_CASE("full check level runs the oracle cross-checks") {
  ScenarioConfig c = parse_config(R"({
    "experiment": "signaling",
    "clocks": [{"label": "C1", "d": 16}],
    "sweep": {"parameter": "t_f", "values": [0.39269908169872414]}
  })");
  RunSettings settings;
  settings.check_level = 1;
  RunOutput out = run(c, settings);
  REQUIRE(out.invariants_ok);
  const auto& diag = out.records[0].diagnostics;
  CHECK(diag.count("oracle_group_average_fidelity") == 1);
  CHECK(diag.count("oracle_two_path_fidelity") == 1);
  CHECK(diag.count("path_agreement_tv") == 1);
  CHECK(diag.at("path_agreement_tv") < 1e-3);
}

TEST_CASE("sweeping a foreign parameter is a config error") {
  ScenarioConfig c = parse_config(R"({
    "experiment": "signaling",
    "sweep": {"parameter": "sigma", "values": [0.1]}
  })");
  CHECK_THROWS_AS(run(c), SimError);
}

TEST_CASE("clock dimension override changes the grid") {
  ScenarioConfig c = parse_config(R"({
    "experiment": "signaling",
    "sweep": {"parameter": "t_f", "values": [0.7853981633974483]}
  })");
  RunSettings settings;
  settings.clock_dim = 32;
  RunOutput out = run(c, settings);
  CHECK(out.invariants_ok);
}
