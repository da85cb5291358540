#include "chronoframe/causality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chronoframe {

namespace {

constexpr Complex kI{0.0, 1.0};

SpaceLayout qubit_pair_layout() { return SpaceLayout({{"A", 2}, {"B", 2}}); }

Matrix embed_qubit(const Matrix& m, const std::string& label, const SpaceLayout& layout) {
  return embed(Operator(SpaceLayout({{label, 2}}), m, is_hermitian(m, kHermitianTol)), layout).mat;
}

// Probability of each projector outcome on one factor of a normalized state.
Distribution factor_distribution(const StateVector& state, const MeasurementSpec& m) {
  std::vector<double> p;
  p.reserve(m.projectors.size());
  for (const auto& proj : m.projectors) {
    Vector selected = embed_qubit(proj, m.target, state.layout) * state.amps;
    p.push_back(selected.squaredNorm());
  }
  return make_distribution(m.outcomes, std::move(p));
}

int grid_steps(double t, double dt) { return static_cast<int>(std::lround(t / dt)); }

}  // namespace

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix hadamard() {
  Matrix m(2, 2);
  m << 1, 1, 1, -1;
  return m / std::numbers::sqrt2;
}

Matrix s_gate() {
  Matrix m(2, 2);
  m << 1, 0, 0, kI;
  return m;
}

Operator two_qubit_free_hamiltonian() {
  SpaceLayout lay = qubit_pair_layout();
  Matrix h = embed_qubit(pauli_x(), "A", lay) + embed_qubit(pauli_x(), "B", lay);
  return Operator(lay, std::move(h), true);
}

Operator two_qubit_interacting_hamiltonian() {
  SpaceLayout lay = qubit_pair_layout();
  Matrix h = embed_qubit(pauli_x(), "A", lay) * embed_qubit(pauli_x(), "B", lay);
  return Operator(lay, std::move(h), true);
}

Operator zero_hamiltonian(const SpaceLayout& system) {
  return Operator(system, Matrix::Zero(system.dim(), system.dim()), true);
}

Matrix hadamard_kick_generator() {
  return std::numbers::pi / (2.0 * std::numbers::sqrt2) * (pauli_x() + pauli_z());
}

Matrix pauli_kick_generator(char axis) {
  Matrix sigma;
  switch (axis) {
    case 'x': sigma = pauli_x(); break;
    case 'y': sigma = pauli_y(); break;
    case 'z': sigma = pauli_z(); break;
    default:
      throw SimError(Err::ConfigError, std::string("unknown Pauli axis '") + axis + "'");
  }
  return std::numbers::pi / 2.0 * (sigma - Matrix::Identity(2, 2));
}

Operator y_measurement_kick(const std::string& target, const std::string& ancilla) {
  // Controlled basis rotation: |+y>|0> -> |+y>|+y>, |-y>|0> -> |-y>|-y>.
  Vector plus_y(2), minus_y(2);
  plus_y << 1.0, kI;
  minus_y << 1.0, -kI;
  plus_y /= std::numbers::sqrt2;
  minus_y /= std::numbers::sqrt2;

  Matrix rot(2, 2);
  rot.col(0) = plus_y;
  rot.col(1) = minus_y;

  Matrix ctrl = Matrix::Zero(4, 4);
  SpaceLayout pair({{target, 2}, {ancilla, 2}});
  Matrix pp = plus_y * plus_y.adjoint();
  Matrix mm = minus_y * minus_y.adjoint();
  ctrl = embed_qubit(pp, target, pair) + embed_qubit(mm, target, pair) * embed_qubit(pauli_x(), ancilla, pair);
  Matrix u = embed_qubit(rot, ancilla, pair) * ctrl;

  return Operator(pair, unitary_generator(u), true);
}

InterventionChoice InterventionChoice::none() { return {"none", Matrix::Identity(2, 2)}; }

InterventionChoice InterventionChoice::unitary(const std::string& name, Matrix u) {
  if (max_abs(u * u.adjoint() - Matrix::Identity(u.rows(), u.cols())) > 1e-11) {
    throw SimError(Err::NotHermitian, "intervention '" + name + "' is not unitary");
  }
  return {name, std::move(u)};
}

MeasurementSpec MeasurementSpec::pauli_y(const std::string& target) {
  Vector plus_y(2), minus_y(2);
  plus_y << 1.0, kI;
  minus_y << 1.0, -kI;
  plus_y /= std::numbers::sqrt2;
  minus_y /= std::numbers::sqrt2;
  MeasurementSpec m;
  m.target = target;
  m.outcomes = {"plus_y", "minus_y"};
  m.projectors = {plus_y * plus_y.adjoint(), minus_y * minus_y.adjoint()};
  m.validate();
  return m;
}

void MeasurementSpec::validate() const {
  if (outcomes.size() != projectors.size() || projectors.empty()) {
    throw SimError(Err::ConfigError, "measurement outcomes and projectors mismatch");
  }
  Matrix sum = Matrix::Zero(projectors[0].rows(), projectors[0].cols());
  for (const auto& proj : projectors) {
    if (!is_hermitian(proj, kHermitianTol)) {
      throw SimError(Err::NotHermitian, "measurement projector is not Hermitian");
    }
    if (max_abs(proj * proj - proj) > 1e-12) {
      throw SimError(Err::ConfigError, "measurement projector is not idempotent");
    }
    sum += proj;
  }
  if (max_abs(sum - Matrix::Identity(sum.rows(), sum.cols())) > 1e-12) {
    throw SimError(Err::ConfigError, "measurement projectors do not resolve the identity");
  }
}

Distribution make_distribution(std::vector<std::string> labels, std::vector<double> p) {
  double sum = 0.0;
  for (auto& x : p) {
    if (x < -1e-12) {
      throw SimError(Err::Internal, "negative probability " + std::to_string(x));
    }
    x = std::max(x, 0.0);
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    throw SimError(Err::Internal, "distribution sums to " + std::to_string(sum));
  }
  return Distribution{std::move(labels), std::move(p)};
}

double Distribution::total_variation(const Distribution& other) const {
  if (labels != other.labels) {
    throw SimError(Err::Internal, "comparing distributions over different outcomes");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - other.p[i]);
  return 0.5 * acc;
}

double Distribution::operator[](const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return p[i];
  }
  throw SimError(Err::Internal, "no outcome labeled '" + label + "'");
}

namespace {

Distribution signaling_closed_form(const SignalingScenario& sc, const InterventionChoice& choice,
                                   const MeasurementSpec& m, bool with_dilation) {
  const double dt = sc.period / sc.clock_dim;
  ClockModel clock = build_clock("C1", sc.clock_dim, dt, 1);
  clock.grid_index(sc.t_i);
  clock.grid_index(sc.t_f);

  SpaceLayout sys({{"A", 2}, {"B", 2}, {"Bp", 2}});
  Operator h_s(qubit_pair_layout(), sc.h_s, true);
  Operator h_full = embed(h_s, sys);

  std::vector<KickEvent> events;
  const bool has_choice = max_abs(choice.u - Matrix::Identity(2, 2)) > 1e-14;
  if (has_choice) {
    Operator k_a(SpaceLayout({{"A", 2}}), unitary_generator(choice.u), true);
    events.push_back(KickEvent{"C1", sc.t_i, k_a, 1.0});
  }
  if (with_dilation) {
    events.push_back(KickEvent{"C1", sc.t_f, y_measurement_kick(m.target, "Bp"), 1.0});
  }
  std::sort(events.begin(), events.end(),
            [](const KickEvent& a, const KickEvent& b) { return a.tau < b.tau; });
  KickSchedule schedule(std::move(events), sys);
  PiecewisePropagator prop(h_full, std::move(schedule));

  Vector phi0 = Vector::Zero(sys.dim());
  phi0(0) = 1.0;

  if (with_dilation) {
    const double readout = sc.t_f + 4.0 * dt;
    if (readout <= sc.t_f || readout >= sc.period) {
      throw SimError(Err::BadReadoutTime, "readout must fall after t_f and before the period");
    }
    StateVector psi(sys, prop.at(clock.grid_time(clock.grid_index(readout))) * phi0);
    MeasurementSpec record = m;
    record.target = "Bp";
    return factor_distribution(psi, record);
  }
  StateVector psi(sys, prop.at(sc.t_f) * phi0);
  return factor_distribution(psi, m);
}

Distribution signaling_constraint_path(const SignalingScenario& sc,
                                       const InterventionChoice& choice,
                                       const MeasurementSpec& m) {
  const double dt = sc.period / sc.clock_dim;
  ClockModel clock = build_clock("C1", sc.clock_dim, dt, 1);

  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", sc.clock_dim}, {"A", 2}, {"B", 2}});
  spec.clocks = {clock};
  spec.clock_terms = {{"C1", 1}};
  spec.system_term = Operator(qubit_pair_layout(), sc.h_s, true);
  PreparedConstraint pc(std::move(spec));

  Vector kin_amps = Vector::Zero(pc.matrix().layout.dim());
  kin_amps(0) = 1.0;  // |t=0>_C1 |0,0>_AB
  StateVector kin(pc.matrix().layout, std::move(kin_amps));
  PhysicalState psi = kinematical_to_physical(pc, kin, "C1", 0.0);

  // Intervention as a choice of physical state: apply the unitary to the
  // conditional state at t_i and lift it back.
  ConditionalState at_ti = reduce(psi, clock, sc.t_i);
  at_ti.state.amps = embed_qubit(choice.u, "A", at_ti.state.layout) * at_ti.state.amps;
  PhysicalState kicked = coreduce(at_ti, pc);
  if (kicked.null_flag) {
    throw SimError(Err::DegenerateNormalization, "intervened state left the physical space");
  }

  ConditionalState at_tf = reduce(kicked, clock, sc.t_f);
  const double n = at_tf.state.norm();
  if (n < 1e-14) {
    throw SimError(Err::DegenerateNormalization, "conditional state vanishes at t_f");
  }
  at_tf.state.amps /= n;
  return factor_distribution(at_tf.state, m);
}

}  // namespace

Distribution signaling_probability(const SignalingScenario& sc, const InterventionChoice& choice,
                                   const MeasurementSpec& m) {
  switch (sc.path) {
    case SignalingScenario::Path::closed_form:
      return signaling_closed_form(sc, choice, m, /*with_dilation=*/true);
    case SignalingScenario::Path::constraint:
      return signaling_constraint_path(sc, choice, m);
  }
  throw SimError(Err::Internal, "unreachable");
}

Distribution direct_born_probability(const SignalingScenario& sc, const InterventionChoice& choice,
                                     const MeasurementSpec& m) {
  if (sc.path == SignalingScenario::Path::constraint) {
    return signaling_constraint_path(sc, choice, m);
  }
  return signaling_closed_form(sc, choice, m, /*with_dilation=*/false);
}

SignalingReport compare_interventions(const SignalingScenario& sc,
                                      const std::vector<InterventionChoice>& choices,
                                      const MeasurementSpec& m) {
  if (choices.size() < 2) {
    throw SimError(Err::ConfigError, "compare_interventions needs at least two choices");
  }
  SignalingReport report;
  for (const auto& choice : choices) {
    report.distributions.emplace_back(choice.name, signaling_probability(sc, choice, m));
  }
  for (std::size_t i = 0; i < choices.size(); ++i) {
    for (std::size_t j = i + 1; j < choices.size(); ++j) {
      report.max_tv = std::max(report.max_tv, report.distributions[i].second.total_variation(
                                                  report.distributions[j].second));
    }
  }
  report.signaling = report.max_tv > report.threshold;
  return report;
}

NaiveEmbeddingReport naive_embedding_demo(const Matrix& m_a, const Matrix& h_s, int clock_dim,
                                          const ProfileSpec& profile, double tau_i, double tau_f) {
  const double period = 2.0 * std::numbers::pi;
  const double dt = period / clock_dim;
  ClockModel c1 = build_clock("C1", clock_dim, dt, 1);
  ClockModel c2 = build_clock("C2", clock_dim, dt, 1);

  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", clock_dim}, {"C2", clock_dim}, {"A", 2}, {"B", 2}});
  spec.clocks = {c1, c2};
  spec.clock_terms = {{"C1", 1}, {"C2", 1}};
  spec.system_term = Operator(qubit_pair_layout(), h_s, true);
  PreparedConstraint pc(std::move(spec));

  DelocalizationProfile phi = build_profile(c2, profile);
  Vector kin_amps = Vector::Zero(pc.matrix().layout.dim());
  const long sys_dim = 4;
  for (int k = 0; k < clock_dim; ++k) {
    // |0>_C1 |t_k>_C2 |00>_AB
    kin_amps((0L * clock_dim + k) * sys_dim + 0) = phi.samples(k);
  }
  StateVector kin(pc.matrix().layout, std::move(kin_amps));
  PhysicalState psi = kinematical_to_physical(pc, kin, "C1", 0.0);

  // Frame 1: intervene at tau_i, read out at tau_f.
  ConditionalState cond1 = reduce(psi, c1, tau_i);
  cond1.state.amps = embed_qubit(m_a, "A", cond1.state.layout) * cond1.state.amps;
  cond1.state.amps /= cond1.state.norm();
  PhysicalState kicked = coreduce(cond1, pc);
  if (kicked.null_flag) {
    throw SimError(Err::DegenerateNormalization, "intervened state left the physical space");
  }

  MeasurementSpec m = MeasurementSpec::pauli_y("B");
  ConditionalState f1 = reduce(kicked, c1, tau_f);
  f1.state.amps /= f1.state.norm();
  NaiveEmbeddingReport report;
  report.p_frame1 = factor_distribution(f1.state, m);

  // Frame 2 at the matched reading: transformed projectors on the frame-2
  // layout.
  ConditionalState f2 = reduce(kicked, c2, tau_f);
  f2.state.amps /= f2.state.norm();
  std::vector<double> p2;
  for (const auto& proj : m.projectors) {
    Operator frame1_proj(SpaceLayout({{"B", 2}}), proj, true);
    Operator transformed = transform_observable(frame1_proj, pc, "C1", tau_f, "C2", tau_f);
    p2.push_back((f2.state.amps.adjoint() * transformed.mat * f2.state.amps).real()(0));
  }
  report.p_frame2 = make_distribution(m.outcomes, std::move(p2));
  for (std::size_t i = 0; i < report.p_frame1.p.size(); ++i) {
    report.prob_deviation =
        std::max(report.prob_deviation, std::abs(report.p_frame1.p[i] - report.p_frame2.p[i]));
  }

  // Support spreading of the intervention operator itself.
  SpaceLayout frame1 = pc.matrix().layout.without("C1");
  Operator op1(SpaceLayout({{"A", 2}}), m_a, is_hermitian(m_a, kHermitianTol));
  Operator op1_full = embed(op1, frame1);
  for (const auto& f : frame1.factors()) {
    report.frame1_supports[f.label] = support_norm(op1_full, f.label);
  }
  Operator op2 = transform_observable(op1, pc, "C1", tau_i, "C2", tau_i);
  for (const auto& f : op2.layout.factors()) {
    report.frame2_supports[f.label] = support_norm(op2, f.label);
  }
  return report;
}

ReversedOrderReport reversed_clock_ordering(const Matrix& u_a, const Matrix& u_b, double sigma,
                                            int clock_dim, Vector initial) {
  const double period = 2.0 * std::numbers::pi;
  const double dt = period / clock_dim;
  const double delta_tau = 16.0 * dt;
  ClockModel c1 = build_clock("C1", clock_dim, dt, 1);
  ClockModel c2 = build_clock("C2", clock_dim, dt, 1);

  if (initial.size() == 0) {
    initial = Vector(2);
    initial << 1.0, 1.0;
    initial /= std::numbers::sqrt2;
  }
  Matrix composed = u_b * u_a;
  Matrix h = unitary_generator(composed) / delta_tau;  // e^{-i delta_tau H} = U_B U_A
  Eigh h_eig = eigh(Operator(SpaceLayout({{"S", 2}}), h, true));
  auto evolve = [&](double t) {
    Vector phases(2);
    for (long i = 0; i < 2; ++i) phases(i) = std::polar(1.0, -t * h_eig.values(i));
    return (h_eig.vectors * phases.asDiagonal() * h_eig.vectors.adjoint()).eval();
  };

  DelocalizationProfile phi = build_profile(c2, sigma > 0.0 ? ProfileSpec::gaussian(0.0, sigma)
                                                            : ProfileSpec::kronecker(0.0));

  ReversedOrderReport report;
  Matrix rho0 = initial * initial.adjoint();

  // Frame of the forward clock: |psi_(1)(tau)> = sum_k phi_k |t_k - tau>_C2
  // e^{-i tau H}|phi_0>; the second clock traces out.
  {
    SpaceLayout lay({{"C2", clock_dim}, {"S", 2}});
    Vector amps = Vector::Zero(lay.dim());
    Vector sys = evolve(delta_tau) * initial;
    for (int k = 0; k < clock_dim; ++k) {
      long ket = c2.grid_index(c2.grid_time(k) - delta_tau);
      amps.segment(ket * 2, 2) += phi.samples(k) * sys;
    }
    StateVector cond(lay, std::move(amps));
    cond.amps /= cond.norm();
    report.rho_c1 =
        reduced_subsystem_state(ConditionalState{"C1", delta_tau, std::move(cond)}, {"S"}).mat;
  }

  // Frame of the reversed clock: |psi_(2)(tau)> = sum_k phi_k |t_k - tau>_C1
  // e^{+i(tau - t_k) H}|phi_0>, with grid times read as signed offsets.
  {
    SpaceLayout lay({{"C1", clock_dim}, {"S", 2}});
    Vector amps = Vector::Zero(lay.dim());
    for (int k = 0; k < clock_dim; ++k) {
      double t = c2.grid_time(k);
      if (t > period / 2.0) t -= period;
      long ket = c1.grid_index(c2.grid_time(k) - delta_tau);
      amps.segment(ket * 2, 2) += phi.samples(k) * (evolve(-(delta_tau - t)) * initial);
    }
    StateVector cond(lay, std::move(amps));
    cond.amps /= cond.norm();
    report.rho_c2 =
        reduced_subsystem_state(ConditionalState{"C2", delta_tau, std::move(cond)}, {"S"}).mat;
  }

  report.predicted_ba = composed * rho0 * composed.adjoint();
  Matrix swapped = u_a * u_b;
  report.predicted_ab = swapped * rho0 * swapped.adjoint();
  report.distance_c1_vs_ba = trace_distance(report.rho_c1, report.predicted_ba);
  report.distance_c2_vs_ab = trace_distance(report.rho_c2, report.predicted_ab);
  return report;
}

namespace {

double conditional_norm_sum(const PhysicalState& psi, const ClockModel& c1, double scale_sq) {
  double acc = 0.0;
  for (int k = 0; k < c1.dim(); ++k) {
    acc += reduce(psi, c1, c1.grid_time(k)).state.amps.squaredNorm();
  }
  return c1.dt() * acc * scale_sq;
}

}  // namespace

double sync_physical_norm(int d, const ProfileSpec& profile, double period) {
  const double dt = period / d;
  ClockModel c1 = build_clock("C1", d, dt, 1);
  ClockModel c2 = build_clock("C2", d, dt, 1);
  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", d}, {"C2", d}});
  spec.clocks = {c1, c2};
  spec.clock_terms = {{"C1", 1}, {"C2", 1}};
  PreparedConstraint pc(std::move(spec));

  DelocalizationProfile phi = build_profile(c2, profile);
  Vector kin = Vector::Zero(pc.matrix().layout.dim());
  for (int k = 0; k < d; ++k) kin(k) = phi.samples(k);  // |0>_C1 (x) profile
  PhysicalState psi = kinematical_to_physical(pc, StateVector(pc.matrix().layout, kin), "C1", 0.0);
  return conditional_norm_sum(psi, c1, phi.continuum_norm_sq);
}

std::vector<SyncScanRow> sync_divergence_scan(const std::vector<int>& dims,
                                              const std::vector<double>& widths, double period) {
  std::vector<SyncScanRow> rows;
  for (int d : dims) {
    const double dt = period / d;
    ClockModel c1 = build_clock("C1", d, dt, 1);
    {
      ConstraintSpec spec;
      spec.layout = c1.layout();
      spec.clocks = {c1};
      spec.clock_terms = {{"C1", 1}};
      PreparedConstraint pc(std::move(spec));
      Vector kin = Vector::Zero(d);
      kin(0) = 1.0;
      PhysicalState psi =
          kinematical_to_physical(pc, StateVector(c1.layout(), kin), "C1", 0.0);
      rows.push_back({d, "single_clock", 0.0, conditional_norm_sum(psi, c1, 1.0)});
    }
    rows.push_back({d, "kronecker", 0.0, sync_physical_norm(d, ProfileSpec::kronecker(0.0), period)});
    for (double sigma : widths) {
      rows.push_back(
          {d, "gaussian", sigma, sync_physical_norm(d, ProfileSpec::gaussian(0.0, sigma), period)});
    }
  }
  return rows;
}

namespace {

struct TwoClockScenario {
  ClockModel c1, c2;
  ConstraintSpec spec;
  StateVector kin;
  DelocalizationProfile phi;
  double period;
};

TwoClockScenario build_two_clock_scenario(int clock_dim, const ProfileSpec& profile,
                                          const SpaceLayout& system, const Matrix& h_s,
                                          std::vector<KickTerm> kicks, const Vector& phi0) {
  const double period = 2.0 * std::numbers::pi;
  const double dt = period / clock_dim;
  ClockModel c1 = build_clock("C1", clock_dim, dt, 1);
  ClockModel c2 = build_clock("C2", clock_dim, dt, 1);

  ConstraintSpec spec;
  std::vector<Factor> factors = {{"C1", clock_dim}, {"C2", clock_dim}};
  for (const auto& f : system.factors()) factors.push_back(f);
  spec.layout = SpaceLayout(std::move(factors));
  spec.clocks = {c1, c2};
  spec.clock_terms = {{"C1", 1}, {"C2", 1}};
  spec.system_term = Operator(system, h_s, true);
  spec.kick_terms = std::move(kicks);

  DelocalizationProfile phi = build_profile(c2, profile);
  Vector kin_amps = Vector::Zero(spec.layout.dim());
  const long sys_dim = system.dim();
  for (int k = 0; k < clock_dim; ++k) {
    kin_amps.segment((0L * clock_dim + k) * sys_dim, sys_dim) = phi.samples(k) * phi0;
  }
  StateVector kin(spec.layout, std::move(kin_amps));
  return TwoClockScenario{c1, c2, std::move(spec), std::move(kin), std::move(phi), period};
}

// Kick-order weights over the delocalization profile, as seen from one frame
// at a late reading. Returns {a_first, b_first, partial}.
struct OrderWeights {
  double a_first = 0.0;
  double b_first = 0.0;
  double partial = 0.0;

  std::string verdict() const {
    if (a_first >= 0.4 && b_first >= 0.4) return "indefinite";
    if (b_first + partial < 1e-3) return "A_then_B";
    if (a_first + partial < 1e-3) return "B_then_A";
    return "partial";
  }
};

OrderWeights order_weights(const TwoClockScenario& sc, double tau_a, double tau_b, double reading,
                           bool on_c1) {
  OrderWeights w;
  for (int k = 0; k < sc.c2.dim(); ++k) {
    const double weight = std::norm(sc.phi.samples(k));
    if (weight < 1e-30) continue;
    double t2 = sc.c2.grid_time(k);
    if (t2 > sc.period / 2.0) t2 -= sc.period;
    const double s = on_c1 ? reading : reading - t2;
    const double ua = tau_a;
    const double ub = tau_b - t2;
    const bool a_done = ua >= 0.0 && ua <= s;
    const bool b_done = ub >= 0.0 && ub <= s;
    if (a_done && b_done) {
      (ua < ub ? w.a_first : w.b_first) += weight;
    } else {
      w.partial += weight;
    }
  }
  return w;
}

}  // namespace

SwitchReport quantum_switch_scenario(const Matrix& u_a, const Matrix& u_b, double tau_a,
                                     double tau_b, const ProfileSpec& profile, const Matrix& h_s,
                                     int clock_dim) {
  if (profile.kind == ProfileKind::bimodal && profile.offset < 3.0 * profile.sigma) {
    throw SimError(Err::IndistinctBranches,
                   "bimodal peaks closer than 3 sigma cannot resolve the two orders");
  }
  if (h_s.rows() != 2) {
    throw SimError(Err::InvalidDimension, "the switch target is a single qubit");
  }

  // Both operations address the same target system; only their timing clocks
  // differ, so the inter-clock delocalization controls the order.
  SpaceLayout system({{"S", 2}});
  Operator k_a(system, unitary_generator(u_a), true);
  Operator k_b(system, unitary_generator(u_b), true);
  std::vector<KickTerm> kicks;
  kicks.push_back(KickTerm{"C1", InstantaneousKick{tau_a, 1.0}, k_a});
  kicks.push_back(KickTerm{"C2", InstantaneousKick{tau_b, 1.0}, k_b});

  Vector phi0 = Vector::Zero(2);
  phi0(0) = 1.0;
  TwoClockScenario sc =
      build_two_clock_scenario(clock_dim, profile, system, h_s, std::move(kicks), phi0);
  const double dt = sc.c1.dt();

  // Late readings past every kick crossing, with a guard gap.
  const double span = (profile.kind == ProfileKind::bimodal ? profile.offset : 0.0) +
                      4.0 * profile.sigma;
  auto late_reading = [&](double base) {
    int k = grid_steps(base + span, dt) + grid_steps(4.0 * profile.sigma, dt) + 2;
    if (k >= clock_dim) {
      throw SimError(Err::GuardGapViolation, "readings would wrap past the clock period");
    }
    return k * dt;
  };
  const double tau1 = late_reading(std::max(tau_a, tau_b));
  const double tau2 = late_reading(std::max(tau_a, tau_b));

  SwitchReport report;
  OrderWeights w1 = order_weights(sc, tau_a, tau_b, tau1, true);
  OrderWeights w2 = order_weights(sc, tau_a, tau_b, tau2, false);
  report.weight_a_first_c1 = w1.a_first;
  report.weight_b_first_c1 = w1.b_first;
  report.weight_a_first_c2 = w2.a_first;
  report.weight_b_first_c2 = w2.b_first;
  report.order_c1 = w1.verdict();
  report.order_c2 = w2.verdict();

  // Representative branch states in frame 1.
  TwoClockPropagator prop(Operator(system, h_s, true),
                          KickEvent{"C1", tau_a, k_a, 1.0}, KickEvent{"C2", tau_b, k_b, 1.0});
  double best_a = 0.0, best_b = 0.0;
  for (int k = 0; k < clock_dim; ++k) {
    const double weight = std::norm(sc.phi.samples(k));
    if (weight < 1e-30) continue;
    double t2 = sc.c2.grid_time(k);
    if (t2 > sc.period / 2.0) t2 -= sc.period;
    const int branch = prop.branch(tau1, t2);
    if (branch == 5 && weight > best_a) {
      best_a = weight;
      report.branch_state_a_first = prop.at(tau1, t2) * phi0;
    } else if (branch == 3 && weight > best_b) {
      best_b = weight;
      report.branch_state_b_first = prop.at(tau1, t2) * phi0;
    }
  }
  if (report.branch_state_a_first.size() > 0 && report.branch_state_b_first.size() > 0) {
    report.branch_overlap = report.branch_state_b_first.dot(report.branch_state_a_first);
  }

  // Interference readout: project the frame-1 conditional onto symmetric and
  // antisymmetric combinations of mirrored second-clock readings.
  ConditionalState cond = conditional_with_kicks(sc.spec, sc.kin, "C1", tau1);
  const long sys_dim = system.dim();
  auto segment = [&](long ket) { return cond.state.amps.segment(ket * sys_dim, sys_dim); };
  double p_sym = 0.0, p_anti = 0.0;
  for (int k = 1; k < clock_dim / 2; ++k) {
    long plus = sc.c2.grid_index(tau1 + k * dt);
    long minus = sc.c2.grid_index(tau1 - k * dt);
    p_sym += 0.5 * (segment(plus) + segment(minus)).squaredNorm();
    p_anti += 0.5 * (segment(plus) - segment(minus)).squaredNorm();
  }
  p_sym += segment(sc.c2.grid_index(tau1)).squaredNorm();
  if (clock_dim % 2 == 0) {
    p_sym += segment(sc.c2.grid_index(tau1 + clock_dim / 2 * dt)).squaredNorm();
  }
  report.interference_contrast = p_sym - p_anti;
  return report;
}

TwoFrameReport two_frame_causal_consistency(const Matrix& h_s, double tau_a, double tau_b,
                                            const ProfileSpec& profile, int clock_dim) {
  if (std::abs(tau_a - tau_b) <= 3.0 * profile.sigma) {
    throw SimError(Err::OrderNotDefined,
                   "kick readings closer than 3 sigma belong to the switch regime");
  }

  SpaceLayout system({{"A", 2}, {"B", 2}, {"Bp", 2}});
  Operator k_a(SpaceLayout({{"A", 2}}), hadamard_kick_generator(), true);
  Operator k_meas = y_measurement_kick("B", "Bp");
  std::vector<KickTerm> kicks;
  kicks.push_back(KickTerm{"C1", InstantaneousKick{tau_a, 1.0}, k_a});
  kicks.push_back(KickTerm{"C2", InstantaneousKick{tau_b, 1.0}, k_meas});

  SpaceLayout pair = qubit_pair_layout();
  Operator h_pair(pair, h_s, true);
  Operator h_sys = embed(h_pair, system);

  Vector phi0 = Vector::Zero(system.dim());
  phi0(0) = 1.0;
  TwoClockScenario sc =
      build_two_clock_scenario(clock_dim, profile, system, h_sys.mat, std::move(kicks), phi0);
  const double dt = sc.c1.dt();

  auto late_reading = [&]() {
    int k = grid_steps(std::max(tau_a, tau_b) + 4.0 * profile.sigma, dt) +
            grid_steps(4.0 * profile.sigma, dt) + 4;
    if (k >= clock_dim) {
      throw SimError(Err::GuardGapViolation, "readings would wrap past the clock period");
    }
    return k * dt;
  };
  const double tau1 = late_reading();
  const double tau2 = late_reading();

  MeasurementSpec record = MeasurementSpec::pauli_y("Bp");

  TwoFrameReport report;
  {
    ConditionalState cond = conditional_with_kicks(sc.spec, sc.kin, "C1", tau1);
    report.p_c1 = factor_distribution(cond.state, record);
  }
  {
    ConditionalState cond = conditional_with_kicks(sc.spec, sc.kin, "C2", tau2);
    report.p_c2 = factor_distribution(cond.state, record);
  }
  OrderWeights w1 = order_weights(sc, tau_a, tau_b, tau1, true);
  OrderWeights w2 = order_weights(sc, tau_a, tau_b, tau2, false);
  report.order_c1 = w1.verdict();
  report.order_c2 = w2.verdict();
  report.delocalized_kick_c1 = "B";  // the kick timed by the other clock
  report.delocalized_kick_c2 = "A";

  SignalingScenario single;
  single.clock_dim = clock_dim;
  single.h_s = h_s;
  single.t_i = tau_a;
  single.t_f = tau_b;
  single.path = SignalingScenario::Path::closed_form;
  report.p_single_clock =
      signaling_probability(single, InterventionChoice::unitary("hadamard", hadamard()),
                            MeasurementSpec::pauli_y("B"));

  for (std::size_t i = 0; i < report.p_c1.p.size(); ++i) {
    report.cross_frame_deviation =
        std::max(report.cross_frame_deviation, std::abs(report.p_c1.p[i] - report.p_c2.p[i]));
    report.vs_single_clock_deviation = std::max(
        report.vs_single_clock_deviation, std::abs(report.p_c1.p[i] - report.p_single_clock.p[i]));
  }
  return report;
}

}  // namespace chronoframe
