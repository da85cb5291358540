#include "chronoframe/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "chronoframe/perspective.hpp"

namespace chronoframe {

namespace {

using nlohmann::json;

double pi() { return std::numbers::pi; }

Matrix named_gate(const std::string& name) {
  if (name == "pauli_x") return pauli_x();
  if (name == "pauli_y") return pauli_y();
  if (name == "pauli_z") return pauli_z();
  if (name == "hadamard") return hadamard();
  if (name == "s_gate") return s_gate();
  if (name == "identity") return Matrix::Identity(2, 2);
  throw SimError(Err::ConfigError, "unknown gate '" + name + "'");
}

Matrix hamiltonian_matrix(const ScenarioConfig& config) {
  const auto& h = config.hamiltonian;
  if (h.preset == "appendix_b_free") return two_qubit_free_hamiltonian().mat;
  if (h.preset == "appendix_b_interacting") return two_qubit_interacting_hamiltonian().mat;
  if (h.preset == "zero") {
    long dim = 1;
    for (const auto& f : config.system) dim *= f.dim;
    return Matrix::Zero(dim, dim);
  }
  // custom: inline matrix or file
  std::vector<std::vector<double>> re = h.custom_re, im = h.custom_im;
  if (!h.file.empty()) {
    std::ifstream in(h.file);
    if (!in) throw SimError(Err::ConfigError, "cannot open hamiltonian file '" + h.file + "'");
    json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) {
      throw SimError(Err::ConfigError, "malformed hamiltonian file '" + h.file + "'");
    }
    re.clear();
    im.clear();
    for (const auto& row : doc.value("matrix_re", json::array())) {
      re.push_back(row.get<std::vector<double>>());
    }
    for (const auto& row : doc.value("matrix_im", json::array())) {
      im.push_back(row.get<std::vector<double>>());
    }
  }
  if (re.empty()) throw SimError(Err::ConfigError, "custom hamiltonian has no matrix");
  const long n = static_cast<long>(re.size());
  Matrix m = Matrix::Zero(n, n);
  for (long i = 0; i < n; ++i) {
    if (static_cast<long>(re[i].size()) != n) {
      throw SimError(Err::ConfigError, "custom hamiltonian is not square");
    }
    for (long j = 0; j < n; ++j) {
      double imag = im.empty() ? 0.0 : im[i][j];
      m(i, j) = Complex(re[i][j], imag);
    }
  }
  if (!is_hermitian(m, 1e-10)) {
    throw SimError(Err::NotHermitian, "custom hamiltonian is not Hermitian");
  }
  return m;
}

ProfileSpec profile_spec(const ScenarioConfig& config, double default_sigma) {
  const auto& p = config.profile;
  if (p.kind == "kronecker") return ProfileSpec::kronecker(p.center);
  const double sigma = p.sigma > 0.0 ? p.sigma : default_sigma;
  if (p.kind == "gaussian") return ProfileSpec::gaussian(p.center, sigma);
  return ProfileSpec::bimodal(p.center, p.offset, sigma);
}

// Deterministic Haar-ish 2x2 unitary from raw generator bits.
Matrix random_unitary(std::mt19937_64& rng) {
  auto u01 = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  double q[4];
  for (int i = 0; i < 4; i += 2) {
    double a = u01(), b = u01();
    double r = std::sqrt(-2.0 * std::log(a + 1e-300));
    q[i] = r * std::cos(2.0 * pi() * b);
    q[i + 1] = r * std::sin(2.0 * pi() * b);
  }
  double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (double& x : q) x /= n;
  Matrix u(2, 2);
  u << Complex(q[0], q[1]), Complex(q[2], q[3]), Complex(-q[2], q[3]), Complex(q[0], -q[1]);
  return u;
}

struct PointContext {
  const ScenarioConfig* config;
  const RunSettings* settings;
  int clock_dim;
  double dt;  // of the primary clock
  std::uint64_t seed;
};

void oracle_cross_checks(const PointContext& ctx, const SignalingScenario& sc,
                         ResultRecord& rec) {
  // Group-average versus projector, and the reduce/coreduce round trip, on
  // the scenario's constraint.
  const double dt = sc.period / sc.clock_dim;
  ClockModel clock = build_clock("C1", sc.clock_dim, dt, 1);
  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", sc.clock_dim}, {"A", 2}, {"B", 2}});
  spec.clocks = {clock};
  spec.clock_terms = {{"C1", 1}};
  spec.system_term = Operator(SpaceLayout({{"A", 2}, {"B", 2}}), sc.h_s, true);
  PreparedConstraint pc(std::move(spec));

  Vector kin_amps = Vector::Zero(pc.matrix().layout.dim());
  kin_amps(0) = 1.0;
  StateVector kin(pc.matrix().layout, kin_amps);

  PhysicalState avg = group_average(pc.matrix(), kin, suggested_group_steps(pc.matrix()));
  Vector projected = pc.projector().mat * kin.amps;
  const double fid = fidelity(avg.state.amps, projected);
  rec.diagnostics["oracle_group_average_fidelity"] = fid;
  if (fid < 1.0 - 1e-8) {
    throw SimError(Err::Internal, "group average disagrees with the projector");
  }

  PhysicalState psi = kinematical_to_physical(pc, kin, "C1", 0.0);
  ConditionalState cond = reduce(psi, clock, sc.t_f);
  PhysicalState lifted = coreduce(cond, pc);
  ConditionalState back = reduce(lifted, clock, sc.t_f);
  const double roundtrip = fidelity(back.state.amps, cond.state.amps);
  rec.diagnostics["oracle_two_path_fidelity"] = roundtrip;
  if (roundtrip < 1.0 - 1e-8) {
    throw SimError(Err::Internal, "reduce/coreduce round trip lost fidelity");
  }
  (void)ctx;
}

ResultRecord run_signaling_point(const PointContext& ctx, double t_f) {
  const ScenarioConfig& config = *ctx.config;
  SignalingScenario sc;
  sc.clock_dim = ctx.clock_dim;
  sc.period = ctx.clock_dim * ctx.dt;
  sc.h_s = hamiltonian_matrix(config);
  sc.t_i = config.param("t_i", 0.0);
  sc.t_f = t_f;
  const std::string path = config.option("path", "closed_form");
  sc.path = path == "constraint" ? SignalingScenario::Path::constraint
                                 : SignalingScenario::Path::closed_form;
  if (path != "constraint" && path != "closed_form") {
    throw SimError(Err::ConfigError, "unknown signaling path '" + path + "'");
  }

  std::vector<InterventionChoice> choices;
  const std::string interventions = config.option("interventions", "none,hadamard");
  if (interventions == "random") {
    const int n = static_cast<int>(config.param("n_interventions", 20));
    std::mt19937_64 rng(ctx.seed);
    choices.push_back(InterventionChoice::none());
    for (int i = 0; i < n; ++i) {
      choices.push_back(
          InterventionChoice::unitary("random_" + std::to_string(i), random_unitary(rng)));
    }
  } else {
    std::stringstream ss(interventions);
    std::string name;
    while (std::getline(ss, name, ',')) {
      choices.push_back(name == "none" ? InterventionChoice::none()
                                       : InterventionChoice::unitary(name, named_gate(name)));
    }
  }

  MeasurementSpec m = MeasurementSpec::pauli_y("B");
  SignalingReport report = compare_interventions(sc, choices, m);

  ResultRecord rec;
  rec.scenario = config.name;
  rec.values.emplace_back("t_f", t_f);
  // Leading columns pin the canonical none/hadamard sweep; remaining choices
  // append after.
  auto find = [&](const std::string& name) -> const Distribution* {
    for (const auto& [n, dist] : report.distributions) {
      if (n == name) return &dist;
    }
    return nullptr;
  };
  const Distribution* none = find("none");
  const Distribution* had = find("hadamard");
  if (none) rec.values.emplace_back("p_plus_y_none", (*none)["plus_y"]);
  if (had) rec.values.emplace_back("p_plus_y_hadamard", (*had)["plus_y"]);
  if (none) rec.values.emplace_back("p_minus_y_none", (*none)["minus_y"]);
  if (had) rec.values.emplace_back("p_minus_y_hadamard", (*had)["minus_y"]);
  for (const auto& [name, dist] : report.distributions) {
    if (name == "none" || name == "hadamard") continue;
    rec.values.emplace_back("p_plus_y_" + name, dist["plus_y"]);
  }
  rec.values.emplace_back("tv_distance", report.max_tv);
  rec.strings.emplace_back("verdict", report.signaling ? "signaling" : "no-signaling");

  // Von Neumann equivalence diagnostic on the closed-form path.
  if (sc.path == SignalingScenario::Path::closed_form) {
    double dev = 0.0;
    for (const auto& choice : choices) {
      Distribution dilated = signaling_probability(sc, choice, m);
      Distribution direct = direct_born_probability(sc, choice, m);
      dev = std::max(dev, dilated.total_variation(direct));
    }
    rec.diagnostics["von_neumann_equivalence_tv"] = dev;
    if (dev > 1e-10) {
      throw SimError(Err::Internal, "dilated readout deviates from the direct Born rule");
    }
  }
  if (ctx.settings->check_level > 0) {
    oracle_cross_checks(ctx, sc, rec);
    SignalingScenario alt = sc;
    alt.path = sc.path == SignalingScenario::Path::closed_form
                   ? SignalingScenario::Path::constraint
                   : SignalingScenario::Path::closed_form;
    double dev = 0.0;
    for (const auto& choice : choices) {
      dev = std::max(dev, signaling_probability(sc, choice, m)
                              .total_variation(signaling_probability(alt, choice, m)));
    }
    rec.diagnostics["path_agreement_tv"] = dev;
    if (dev > 1e-3) {
      throw SimError(Err::Internal, "closed-form and constraint paths disagree");
    }
  }
  return rec;
}

ResultRecord run_naive_demo_point(const PointContext& ctx, double tau_f) {
  const ScenarioConfig& config = *ctx.config;
  const double tau_i = config.param("tau_i", 0.0);
  const Matrix m_a = named_gate(config.option("m_a", "hadamard"));
  ProfileSpec profile = profile_spec(config, 2.0 * ctx.dt);

  NaiveEmbeddingReport report =
      naive_embedding_demo(m_a, hamiltonian_matrix(config), ctx.clock_dim, profile, tau_i, tau_f);

  ResultRecord rec;
  rec.scenario = config.name;
  rec.values.emplace_back("tau_f", tau_f);
  for (const auto& [label, support] : report.frame1_supports) {
    rec.values.emplace_back("support_frame1_" + label, support);
  }
  for (const auto& [label, support] : report.frame2_supports) {
    rec.values.emplace_back("support_frame2_" + label, support);
  }
  rec.values.emplace_back("p_plus_y_frame1", report.p_frame1["plus_y"]);
  rec.values.emplace_back("p_plus_y_frame2", report.p_frame2["plus_y"]);
  rec.values.emplace_back("prob_deviation", report.prob_deviation);
  if (report.prob_deviation > 1e-8) {
    throw SimError(Err::Internal, "frame change failed to preserve probabilities");
  }
  return rec;
}

ResultRecord run_reversed_point(const PointContext& ctx, double sigma) {
  const ScenarioConfig& config = *ctx.config;
  const Matrix u_a = named_gate(config.option("u_a", "pauli_x"));
  const Matrix u_b = named_gate(config.option("u_b", "pauli_z"));
  ReversedOrderReport report = reversed_clock_ordering(u_a, u_b, sigma, ctx.clock_dim);

  ResultRecord rec;
  rec.scenario = config.name;
  rec.values.emplace_back("sigma", sigma);
  rec.values.emplace_back("distance_c2_vs_ab", report.distance_c2_vs_ab);
  rec.values.emplace_back("distance_c1_vs_ba", report.distance_c1_vs_ba);
  return rec;
}

ResultRecord run_sync_scan_point(const PointContext& ctx, double d_value) {
  const ScenarioConfig& config = *ctx.config;
  const int d = static_cast<int>(d_value);
  const double period = config.param("period", 2.0 * pi());
  ProfileSpec profile = profile_spec(config, 0.0);
  if (config.profile.kind != "kronecker" && !(config.profile.sigma > 0.0)) {
    throw SimError(Err::InvalidWidth, "sync_scan with a gaussian profile needs profile/sigma");
  }

  ResultRecord rec;
  rec.scenario = config.name;
  rec.values.emplace_back("d", d);
  rec.strings.emplace_back("profile", config.profile.kind);
  rec.values.emplace_back("sigma", config.profile.sigma);
  rec.values.emplace_back("phys_norm", sync_physical_norm(d, profile, period));
  return rec;
}

ResultRecord run_switch_point(const PointContext& ctx, double offset) {
  const ScenarioConfig& config = *ctx.config;
  const double period = ctx.clock_dim * ctx.dt;
  const double tau_a = config.param("tau_a", period / 4.0);
  const double tau_b = config.param("tau_b", period / 4.0);
  const double sigma = config.param("sigma", ctx.dt);
  const Matrix u_a = named_gate(config.option("u_a", "pauli_x"));
  const Matrix u_b = named_gate(config.option("u_b", "pauli_z"));

  ProfileSpec profile = config.profile.kind == "gaussian"
                            ? ProfileSpec::gaussian(config.profile.center, sigma)
                            : ProfileSpec::bimodal(config.profile.center, offset, sigma);

  // The switch target is a single qubit.
  Matrix h_s = config.hamiltonian.preset == "zero" ? Matrix::Zero(2, 2)
                                                   : hamiltonian_matrix(config);
  if (h_s.rows() != 2) {
    throw SimError(Err::ConfigError, "the switch experiment needs a one-qubit hamiltonian");
  }
  SwitchReport report =
      quantum_switch_scenario(u_a, u_b, tau_a, tau_b, profile, h_s, ctx.clock_dim);

  ResultRecord rec;
  rec.scenario = config.name;
  rec.values.emplace_back("tau_a", tau_a);
  rec.values.emplace_back("tau_b", tau_b);
  rec.values.emplace_back("offset", offset);
  rec.values.emplace_back("sigma", sigma);
  rec.values.emplace_back("weight_a_first_c1", report.weight_a_first_c1);
  rec.values.emplace_back("weight_b_first_c1", report.weight_b_first_c1);
  rec.values.emplace_back("weight_a_first_c2", report.weight_a_first_c2);
  rec.values.emplace_back("weight_b_first_c2", report.weight_b_first_c2);
  rec.values.emplace_back("interference_contrast", report.interference_contrast);
  rec.strings.emplace_back("order_c1", report.order_c1);
  rec.strings.emplace_back("order_c2", report.order_c2);
  return rec;
}

ResultRecord run_two_frame_point(const PointContext& ctx, double tau_b) {
  const ScenarioConfig& config = *ctx.config;
  const double tau_a = config.param("tau_a", 4.0 * ctx.dt);
  const double sigma = config.param("sigma", ctx.dt);
  ProfileSpec profile = config.profile.kind == "kronecker"
                            ? ProfileSpec::kronecker(0.0)
                            : ProfileSpec::gaussian(0.0, sigma);

  TwoFrameReport report = two_frame_causal_consistency(hamiltonian_matrix(config), tau_a, tau_b,
                                                       profile, ctx.clock_dim);

  ResultRecord rec;
  rec.scenario = config.name;
  rec.values.emplace_back("tau_a", tau_a);
  rec.values.emplace_back("tau_b", tau_b);
  rec.values.emplace_back("sigma", profile.kind == ProfileKind::kronecker ? 0.0 : sigma);
  rec.values.emplace_back("p_plus_y_c1", report.p_c1["plus_y"]);
  rec.values.emplace_back("p_plus_y_c2", report.p_c2["plus_y"]);
  rec.values.emplace_back("p_plus_y_single", report.p_single_clock["plus_y"]);
  rec.values.emplace_back("cross_frame_deviation", report.cross_frame_deviation);
  rec.values.emplace_back("vs_single_clock_deviation", report.vs_single_clock_deviation);
  rec.strings.emplace_back("order_c1", report.order_c1);
  rec.strings.emplace_back("order_c2", report.order_c2);
  rec.strings.emplace_back("delocalized_kick_c1", report.delocalized_kick_c1);
  rec.strings.emplace_back("delocalized_kick_c2", report.delocalized_kick_c2);
  if (report.cross_frame_deviation > 1e-6) {
    throw SimError(Err::Internal, "frames disagree on the outcome statistics");
  }
  return rec;
}

int thread_budget(const RunSettings& settings, std::size_t points) {
  int n = settings.max_threads > 0 ? settings.max_threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CHRONOFRAME_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  n = std::max(1, std::min<int>(n, static_cast<int>(points)));
  return n;
}

}  // namespace

RunOutput run(const ScenarioConfig& config, const RunSettings& settings) {
  PointContext ctx;
  ctx.config = &config;
  ctx.settings = &settings;
  ctx.clock_dim = settings.clock_dim > 0 ? settings.clock_dim : config.clocks.front().d;
  const auto& c0 = config.clocks.front();
  ctx.dt = c0.dt > 0.0 ? c0.dt : 2.0 * pi() / ctx.clock_dim;
  ctx.seed = settings.seed != 0 ? settings.seed : config.seed;

  // Sweep values and the per-point dispatcher.
  std::vector<double> points;
  std::string parameter;
  if (config.sweep) {
    parameter = config.sweep->parameter;
    points = config.sweep->values;
  } else {
    // Single point at the experiment's default parameter.
    if (config.experiment == "signaling") {
      parameter = "t_f";
      points = {config.param("t_f", pi() / 4.0)};
    } else if (config.experiment == "naive_demo") {
      parameter = "tau_f";
      points = {config.param("tau_f", pi() / 4.0)};
    } else if (config.experiment == "reversed_order") {
      parameter = "sigma";
      points = {config.param("sigma", 2.0 * ctx.dt)};
    } else if (config.experiment == "sync_scan") {
      parameter = "d";
      points = {static_cast<double>(ctx.clock_dim)};
    } else if (config.experiment == "switch") {
      parameter = "offset";
      points = {config.param("offset", 4.0 * ctx.dt)};
    } else {
      parameter = "tau_b";
      points = {config.param("tau_b", config.param("tau_a", 4.0 * ctx.dt) + 8.0 * ctx.dt)};
    }
  }

  // Each experiment sweeps along one primary axis.
  static const std::map<std::string, std::string> axis = {
      {"signaling", "t_f"},      {"naive_demo", "tau_f"}, {"reversed_order", "sigma"},
      {"sync_scan", "d"},        {"switch", "offset"},    {"two_frame", "tau_b"}};
  if (config.sweep && axis.at(config.experiment) != parameter) {
    throw SimError(Err::ConfigError, "experiment '" + config.experiment + "' sweeps over '" +
                                         axis.at(config.experiment) + "', not '" + parameter + "'");
  }

  auto run_point = [&](double value) -> ResultRecord {
    if (config.experiment == "signaling") return run_signaling_point(ctx, value);
    if (config.experiment == "naive_demo") return run_naive_demo_point(ctx, value);
    if (config.experiment == "reversed_order") return run_reversed_point(ctx, value);
    if (config.experiment == "sync_scan") return run_sync_scan_point(ctx, value);
    if (config.experiment == "switch") return run_switch_point(ctx, value);
    return run_two_frame_point(ctx, value);
  };
  auto run_indexed = [&](std::size_t i) -> ResultRecord {
    auto start = std::chrono::steady_clock::now();
    ResultRecord rec = run_point(points[i]);
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    return rec;
  };

  RunOutput out;
  out.records.resize(points.size());
  std::vector<std::string> errors(points.size());

  const int n_threads = thread_budget(settings, points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      try {
        out.records[i] = run_indexed(i);
      } catch (const SimError& e) {
        errors[i] = e.what();
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!errors[i].empty()) {
      out.invariants_ok = false;
      out.failures.push_back(config.name + " [" + parameter + " = " + format_double(points[i]) +
                             "]: " + errors[i]);
    }
  }

  // Post-pass: norm ratios between consecutive sync-scan rows.
  if (config.experiment == "sync_scan" && out.invariants_ok) {
    double prev = 0.0;
    for (auto& rec : out.records) {
      double norm = 0.0;
      for (const auto& [k, v] : rec.values) {
        if (k == "phys_norm") norm = v;
      }
      rec.values.emplace_back("norm_ratio", prev > 0.0 ? norm / prev : 1.0);
      prev = norm;
    }
  }
  return out;
}

void write_csv(const RunOutput& out, std::ostream& os) {
  const ResultRecord* first = nullptr;
  for (const auto& rec : out.records) {
    if (!rec.values.empty()) {
      first = &rec;
      break;
    }
  }
  if (!first) return;
  bool head = true;
  for (const auto& [name, value] : first->values) {
    (void)value;
    os << (head ? "" : ",") << name;
    head = false;
  }
  for (const auto& [name, value] : first->strings) {
    (void)value;
    os << (head ? "" : ",") << name;
    head = false;
  }
  os << "\n";
  for (const auto& rec : out.records) {
    if (rec.values.empty()) continue;  // failed point, reported separately
    bool lead = true;
    for (const auto& [name, value] : rec.values) {
      (void)name;
      os << (lead ? "" : ",") << format_double(value);
      lead = false;
    }
    for (const auto& [name, value] : rec.strings) {
      (void)name;
      os << (lead ? "" : ",") << value;
      lead = false;
    }
    os << "\n";
  }
}

void write_json(const RunOutput& out, const ScenarioConfig& config, std::ostream& os) {
  json doc;
  doc["scenario"] = config.name;
  doc["experiment"] = config.experiment;
  doc["invariants_ok"] = out.invariants_ok;
  doc["failures"] = out.failures;
  doc["records"] = json::array();
  for (const auto& rec : out.records) {
    json jr;
    for (const auto& [k, v] : rec.values) jr["values"][k] = v;
    for (const auto& [k, v] : rec.strings) jr["values"][k] = v;
    for (const auto& [k, v] : rec.diagnostics) jr["diagnostics"][k] = v;
    jr["wall_time_ms"] = rec.wall_time_ms;
    if (config.experiment == "switch") {
      double wa1 = 0, wb1 = 0, wa2 = 0, wb2 = 0;
      for (const auto& [k, v] : rec.values) {
        if (k == "weight_a_first_c1") wa1 = v;
        if (k == "weight_b_first_c1") wb1 = v;
        if (k == "weight_a_first_c2") wa2 = v;
        if (k == "weight_b_first_c2") wb2 = v;
      }
      jr["branch_weights"] = {{"c1", {wa1, wb1}}, {"c2", {wa2, wb2}}};
    }
    doc["records"].push_back(std::move(jr));
  }
  os << doc.dump(2) << "\n";
}

}  // namespace chronoframe
