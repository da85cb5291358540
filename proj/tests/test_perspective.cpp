#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "chronoframe/perspective.hpp"

using namespace chronoframe;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

Matrix pauli_x_mat() {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

Matrix pauli_z_mat() {
  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}

Matrix expi(const Matrix& h, double t) { return expm_hermitian_generator(h, t); }

// Two clocks (d, dt = 2 pi / d) and a qubit, signs as given, H_S = X.
struct TwoClockQubit {
  ConstraintSpec spec;
  ClockModel c1, c2;
  DelocalizationProfile phi;
  StateVector kin;  // |0>_C1 (x) profile (x) |0>_S

  TwoClockQubit(int d, int sign2, const ProfileSpec& prof)
      : c1(build_clock("C1", d, 2 * kPi / d)), c2(build_clock("C2", d, 2 * kPi / d)) {
    spec.layout = SpaceLayout({{"C1", d}, {"C2", d}, {"S", 2}});
    spec.clocks = {c1, c2};
    spec.clock_terms = {{"C1", 1}, {"C2", sign2}};
    spec.system_term = Operator(SpaceLayout({{"S", 2}}), pauli_x_mat(), true);
    phi = build_profile(c2, prof);
    Vector amps = Vector::Zero(spec.layout.dim());
    for (int k = 0; k < d; ++k) amps(2L * k) = phi.samples(k);
    kin = StateVector(spec.layout, std::move(amps));
  }
};

std::mt19937_64 rng(0xfeedbeef);

Matrix random_hermitian(long n) {
  std::normal_distribution<double> dist;
  Matrix m(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) m(i, j) = Complex(dist(rng), dist(rng));
  }
  return 0.5 * (m + m.adjoint()).eval();
}

}  // namespace

TEST_CASE("reduce recovers schroedinger evolution from the physical state") {
  const int d = 16;
  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", d}, {"S", 2}});
  spec.clocks = {build_clock("C1", d, 2 * kPi / d)};
  spec.clock_terms = {{"C1", 1}};
  spec.system_term = Operator(SpaceLayout({{"S", 2}}), pauli_x_mat(), true);
  PreparedConstraint pc(std::move(spec));

  Vector kin = Vector::Zero(pc.matrix().layout.dim());
  kin(0) = 1.0;
  PhysicalState psi = kinematical_to_physical(pc, StateVector(pc.matrix().layout, kin), "C1", 0.0);

  Vector phi0(2);
  phi0 << 1, 0;
  const ClockModel& clock = pc.clock("C1");
  for (int k = 0; k < d; ++k) {
    ConditionalState cond = reduce(psi, clock, clock.grid_time(k));
    Vector expected = expi(pauli_x_mat(), clock.grid_time(k)) * phi0;
    CHECK((cond.state.amps - expected).norm() < 1e-9);
    CHECK(std::abs(cond.state.norm() - 1.0) < 1e-10);
  }
  CHECK_THROWS_AS(reduce(psi, clock, 0.5 * clock.dt()), SimError);
}

TEST_CASE("two-clock reduction matches the grid contraction oracle, reversed clocks") {
  const int d = 16;
  TwoClockQubit sc(d, -1, ProfileSpec::gaussian(0.0, 2 * (2 * kPi / d)));
  PreparedConstraint pc(sc.spec);
  PhysicalState psi = kinematical_to_physical(pc, sc.kin, "C1", 0.0);

  Vector phi0(2);
  phi0 << 1, 0;

  // Frame 1 at tau1: sum_k phi_k |t_k - tau1>_C2 e^{-i tau1 X}|0>.
  const double tau1 = 3 * sc.c1.dt();
  ConditionalState cond1 = reduce(psi, sc.c1, tau1);
  SpaceLayout lay1({{"C2", d}, {"S", 2}});
  Vector oracle1 = Vector::Zero(lay1.dim());
  Vector evolved1 = expi(pauli_x_mat(), tau1) * phi0;
  for (int k = 0; k < d; ++k) {
    long ket = sc.c2.grid_index(sc.c2.grid_time(k) - tau1);
    oracle1.segment(2 * ket, 2) += sc.phi.samples(k) * evolved1;
  }
  oracle1 /= oracle1.norm();
  Vector got1 = cond1.state.amps / cond1.state.norm();
  CHECK(fidelity(got1, oracle1) > 1.0 - 1e-8);

  // Frame 2 at tau2: sum_k phi_k |t_k - tau2>_C1 e^{+i(tau2 - t_k) X}|0>.
  const double tau2 = 5 * sc.c2.dt();
  ConditionalState cond2 = reduce(psi, sc.c2, tau2);
  Vector oracle2 = Vector::Zero(lay1.dim());
  for (int k = 0; k < d; ++k) {
    long ket = sc.c1.grid_index(sc.c2.grid_time(k) - tau2);
    Vector sys = expi(pauli_x_mat(), -(tau2 - sc.c2.grid_time(k))) * phi0;
    oracle2.segment(2 * ket, 2) += sc.phi.samples(k) * sys;
  }
  oracle2 /= oracle2.norm();
  Vector got2 = cond2.state.amps / cond2.state.norm();
  CHECK(fidelity(got2, oracle2) > 1.0 - 1e-8);
}

TEST_CASE("coreduce round trip preserves the conditional state") {
  const int d = 12;
  TwoClockQubit sc(d, 1, ProfileSpec::gaussian(0.0, 2 * (2 * kPi / d)));
  PreparedConstraint pc(sc.spec);
  PhysicalState psi = kinematical_to_physical(pc, sc.kin, "C1", 0.0);

  ConditionalState cond = reduce(psi, sc.c1, 2 * sc.c1.dt());
  PhysicalState lifted = coreduce(cond, pc);
  CHECK_FALSE(lifted.null_flag);
  ConditionalState back = reduce(lifted, sc.c1, 2 * sc.c1.dt());
  CHECK(fidelity(back.state.amps, cond.state.amps) > 1.0 - 1e-8);
}

TEST_CASE("coreduce flags states orthogonal to every physical reduction") {
  const int d = 8;
  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", d}, {"C2", d}, {"S", 2}});
  spec.clocks = {build_clock("C1", d, 2 * kPi / d), build_clock("C2", d, 2 * kPi / d)};
  spec.clock_terms = {{"C1", 1}, {"C2", 1}};
  spec.system_term = Operator(SpaceLayout({{"S", 2}}), pauli_x_mat(), true);
  PreparedConstraint pc(std::move(spec));

  // |E_{-d/2}>_C2 (x) |x_->: the partner energy index d/2 falls outside the
  // symmetric window, so no kernel vector reduces onto it.
  const double omega = 1.0;
  Vector e_edge(d);
  for (int k = 0; k < d; ++k) {
    e_edge(k) = std::polar(1.0 / std::sqrt(double(d)), omega * (-d / 2) * (k * 2 * kPi / d));
  }
  Vector x_minus(2);
  x_minus << 1, -1;
  x_minus /= std::numbers::sqrt2;
  SpaceLayout lay({{"C2", d}, {"S", 2}});
  Vector amps = Vector::Zero(lay.dim());
  for (int k = 0; k < d; ++k) amps.segment(2 * k, 2) = e_edge(k) * x_minus;
  ConditionalState cond{"C1", 0.0, StateVector(lay, amps)};
  PhysicalState lifted = coreduce(cond, pc);
  CHECK(lifted.null_flag);
}

TEST_CASE("coreduce of a resting state is the uniform clock superposition") {
  const int d = 8;
  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", d}, {"S", 2}});
  spec.clocks = {build_clock("C1", d, 2 * kPi / d)};
  spec.clock_terms = {{"C1", 1}};
  spec.system_term = Operator(SpaceLayout({{"S", 2}}), Matrix::Zero(2, 2), true);
  PreparedConstraint pc(std::move(spec));

  Vector phi0(2);
  phi0 << 0, 1;
  ConditionalState cond{"C1", 0.0, StateVector(SpaceLayout({{"S", 2}}), phi0)};
  PhysicalState lifted = coreduce(cond, pc);
  CHECK_FALSE(lifted.null_flag);
  for (int k = 0; k < d; ++k) {
    StateVector slice = contract_factor(lifted.state, "C1", k);
    CHECK((slice.amps - phi0 / double(d)).norm() < 1e-12);
  }
}

TEST_CASE("frame change agrees with the direct reduction") {
  const int d = 12;
  TwoClockQubit sc(d, 1, ProfileSpec::gaussian(0.0, 2 * (2 * kPi / d)));
  PreparedConstraint pc(sc.spec);
  PhysicalState psi = kinematical_to_physical(pc, sc.kin, "C1", 0.0);

  const double tau1 = 2 * sc.c1.dt();
  const double tau2 = 5 * sc.c2.dt();
  ConditionalState cond1 = reduce(psi, sc.c1, tau1);
  FrameChangeResult changed = frame_change(cond1, pc, "C2", tau2);
  CHECK(changed.state.clock == "C2");
  CHECK(std::abs(changed.state.state.norm() - 1.0) < 1e-12);

  ConditionalState direct = reduce(psi, sc.c2, tau2);
  CHECK(fidelity(changed.state.state.amps, direct.state.amps) > 1.0 - 1e-8);

  // Same-clock frame change is the identity up to normalization.
  FrameChangeResult same = frame_change(cond1, pc, "C1", tau1);
  CHECK(fidelity(same.state.state.amps, cond1.state.amps) > 1.0 - 1e-10);
}

TEST_CASE("reversed clocks see the system evolve backwards") {
  const int d = 16;
  TwoClockQubit sc(d, -1, ProfileSpec::gaussian(0.0, 2 * (2 * kPi / d)));
  PreparedConstraint pc(sc.spec);
  PhysicalState psi = kinematical_to_physical(pc, sc.kin, "C1", 0.0);

  // rho_S in frame 2 evolves with e^{+i tau X}: compare against the direct
  // sum over the delocalization profile.
  const double tau2 = 4 * sc.c2.dt();
  ConditionalState cond2 = reduce(psi, sc.c2, tau2);
  cond2.state.amps /= cond2.state.norm();
  Operator rho = reduced_subsystem_state(cond2, {"S"});

  Vector phi0(2);
  phi0 << 1, 0;
  Matrix oracle = Matrix::Zero(2, 2);
  for (int k = 0; k < d; ++k) {
    double w = std::norm(sc.phi.samples(k));
    Vector sys = expi(pauli_x_mat(), -(tau2 - sc.c2.grid_time(k))) * phi0;
    oracle += w * (sys * sys.adjoint());
  }
  CHECK(max_abs(rho.mat - oracle) < 1e-8);
}

TEST_CASE("reduced state at the synchronization point approaches the initial state") {
  const int d = 16;
  Vector phi0(2);
  phi0 << 1, 0;
  auto epsilon_for = [&](const ProfileSpec& prof) {
    TwoClockQubit sc(d, -1, prof);
    PreparedConstraint pc(sc.spec);
    PhysicalState psi = kinematical_to_physical(pc, sc.kin, "C1", 0.0);
    ConditionalState cond2 = reduce(psi, sc.c2, 0.0);
    cond2.state.amps /= cond2.state.norm();
    Operator rho = reduced_subsystem_state(cond2, {"S"});
    return max_abs(rho.mat - phi0 * phi0.adjoint());
  };
  const double dt = 2 * kPi / d;
  double wide = epsilon_for(ProfileSpec::gaussian(0.0, 4 * dt));
  double narrow = epsilon_for(ProfileSpec::gaussian(0.0, 2 * dt));
  double sharp = epsilon_for(ProfileSpec::kronecker(0.0));
  CHECK(narrow < wide);
  CHECK(sharp < narrow);
  // The sharp-profile floor is the symmetric-window edge truncation,
  // 1/(2(d-1)) at this size.
  CHECK(sharp < 0.05);
}

TEST_CASE("transform_observable maps the identity to the identity") {
  const int d = 8;
  TwoClockQubit sc(d, 1, ProfileSpec::gaussian(0.0, 2 * (2 * kPi / d)));
  PreparedConstraint pc(sc.spec);
  Operator one = identity(pc.matrix().layout.without("C1"));
  Operator moved = transform_observable(one, pc, "C1", 0.0, "C2", 0.0);
  CHECK(max_abs(moved.mat - Matrix::Identity(moved.dim(), moved.dim())) < 1e-12);
}

TEST_CASE("transform_observable keeps flow-commuting operators local") {
  const int d = 8;
  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", d}, {"C2", d}, {"A", 2}, {"B", 2}});
  spec.clocks = {build_clock("C1", d, 2 * kPi / d), build_clock("C2", d, 2 * kPi / d)};
  spec.clock_terms = {{"C1", 1}, {"C2", 1}};
  Matrix xx = Matrix::Zero(4, 4);
  xx(0, 3) = xx(1, 2) = xx(2, 1) = xx(3, 0) = 1.0;
  spec.system_term = Operator(SpaceLayout({{"A", 2}, {"B", 2}}), xx, true);
  PreparedConstraint pc(std::move(spec));

  Operator x_a(SpaceLayout({{"A", 2}}), pauli_x_mat(), true);
  Operator moved = transform_observable(x_a, pc, "C1", 0.0, "C2", 0.0);
  CHECK(support_norm(moved, "A") > 0.5);
  CHECK(support_norm(moved, "B") < 1e-10);
  CHECK(support_norm(moved, "C1") < 1e-10);

  // A Hadamard does not commute with the coupling flow and spreads.
  Matrix had = (pauli_x_mat() + pauli_z_mat()) / std::numbers::sqrt2;
  Operator h_a(SpaceLayout({{"A", 2}}), had, true);
  Operator spread = transform_observable(h_a, pc, "C1", 0.0, "C2", 0.0);
  CHECK(support_norm(spread, "B") > 1e-6);
  CHECK(support_norm(spread, "C1") > 1e-6);
}

TEST_CASE("transform_observable preserves expectation values") {
  const int d = 12;
  for (int trial = 0; trial < 5; ++trial) {
    TwoClockQubit sc(d, 1, ProfileSpec::gaussian(0.0, 2 * (2 * kPi / d)));
    PreparedConstraint pc(sc.spec);
    PhysicalState psi = kinematical_to_physical(pc, sc.kin, "C1", 0.0);

    const double tau1 = (2 + trial) * sc.c1.dt();
    const double tau2 = (5 + trial) * sc.c2.dt();
    ConditionalState cond1 = reduce(psi, sc.c1, tau1);
    cond1.state.amps /= cond1.state.norm();
    ConditionalState cond2 = reduce(psi, sc.c2, tau2);
    cond2.state.amps /= cond2.state.norm();

    Operator obs(SpaceLayout({{"S", 2}}), random_hermitian(2), true);
    Operator obs_frame1 = embed(obs, pc.matrix().layout.without("C1"));
    Operator moved = transform_observable(obs, pc, "C1", tau1, "C2", tau2);

    double e1 = (cond1.state.amps.adjoint() * obs_frame1.mat * cond1.state.amps).real()(0);
    double e2 = (cond2.state.amps.adjoint() * moved.mat * cond2.state.amps).real()(0);
    CHECK(std::abs(e1 - e2) < 1e-8);
  }
}

TEST_CASE("schroedinger residual vanishes for a resting system") {
  const int d = 16;
  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", d}, {"S", 2}});
  spec.clocks = {build_clock("C1", d, 2 * kPi / d)};
  spec.clock_terms = {{"C1", 1}};
  spec.system_term = Operator(SpaceLayout({{"S", 2}}), Matrix::Zero(2, 2), true);
  PreparedConstraint pc(spec);
  Vector kin = Vector::Zero(pc.matrix().layout.dim());
  kin(0) = 1.0;
  PhysicalState psi = kinematical_to_physical(pc, StateVector(pc.matrix().layout, kin), "C1", 0.0);
  double res = schrodinger_residual(psi, pc.clock("C1"), *spec.system_term);
  CHECK(res < 1e-12);
}

TEST_CASE("schroedinger residual converges at second order") {
  auto residual_at = [](int d) {
    ConstraintSpec spec;
    spec.layout = SpaceLayout({{"C1", d}, {"S", 2}});
    spec.clocks = {build_clock("C1", d, 2 * kPi / d)};
    spec.clock_terms = {{"C1", 1}};
    spec.system_term = Operator(SpaceLayout({{"S", 2}}), pauli_x_mat(), true);
    PreparedConstraint pc(spec);
    Vector kin = Vector::Zero(pc.matrix().layout.dim());
    kin(0) = 1.0;
    PhysicalState psi =
        kinematical_to_physical(pc, StateVector(pc.matrix().layout, kin), "C1", 0.0);
    return schrodinger_residual(psi, pc.clock("C1"), *spec.system_term);
  };
  double r32 = residual_at(32);
  double r64 = residual_at(64);
  CHECK(r32 / r64 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("reversed clock direction flips the conditional generator sign") {
  const int d = 32;
  ConstraintSpec spec;
  spec.layout = SpaceLayout({{"C1", d}, {"S", 2}});
  spec.clocks = {build_clock("C1", d, 2 * kPi / d, -1)};
  spec.clock_terms = {{"C1", 1}};
  spec.system_term = Operator(SpaceLayout({{"S", 2}}), pauli_x_mat(), true);
  PreparedConstraint pc(spec);
  Vector kin = Vector::Zero(pc.matrix().layout.dim());
  kin(0) = 1.0;
  PhysicalState psi = kinematical_to_physical(pc, StateVector(pc.matrix().layout, kin), "C1", 0.0);

  Operator minus_x(SpaceLayout({{"S", 2}}), (-pauli_x_mat()).eval(), true);
  double res_flipped = schrodinger_residual(psi, pc.clock("C1"), minus_x);
  double res_naive = schrodinger_residual(psi, pc.clock("C1"), *spec.system_term);
  CHECK(res_flipped < 1e-2);
  CHECK(res_naive > 0.5);
}

TEST_CASE("reduced_subsystem_state of a product conditional state is pure") {
  SpaceLayout lay({{"C2", 3}, {"S", 2}});
  Vector clock_part(3), sys(2);
  clock_part << 0.5, Complex(0, 0.5), std::sqrt(0.5);
  sys << 1, 0;
  Vector amps(6);
  for (int k = 0; k < 3; ++k) amps.segment(2 * k, 2) = clock_part(k) * sys;
  ConditionalState cond{"C1", 0.0, StateVector(lay, amps)};
  Operator rho = reduced_subsystem_state(cond, {"S"});
  CHECK(max_abs(rho.mat * rho.mat - rho.mat) < 1e-12);  // pure projector
  CHECK(max_abs(rho.mat - sys * sys.adjoint()) < 1e-12);
}

TEST_CASE("subsystem interactions keep their factor structure in both frames") {
  const int d = 8;
  const double dt = 2 * kPi / d;
  SpaceLayout sys({{"A", 2}, {"B", 2}, {"Cq", 2}});
  auto lift = [&](const Matrix& m, const std::string& label) {
    return embed(Operator(SpaceLayout({{label, 2}}), m, true), sys).mat;
  };

  // Commuting block: [H_B + H_C, H_BC] = 0.
  Matrix h_commuting = lift(pauli_x_mat(), "A") + lift(pauli_z_mat(), "B") +
                       lift(pauli_z_mat(), "Cq") +
                       lift(pauli_z_mat(), "B") * lift(pauli_z_mat(), "Cq");
  // Non-commuting block: H_B = Z_B against H_BC = X_B X_C.
  Matrix h_noncommuting = lift(pauli_x_mat(), "A") + lift(pauli_z_mat(), "B") +
                          lift(pauli_x_mat(), "B") * lift(pauli_x_mat(), "Cq");

  for (const Matrix& h_s : {h_commuting, h_noncommuting}) {
    ConstraintSpec spec;
    spec.layout = SpaceLayout({{"C1", d}, {"C2", d}, {"A", 2}, {"B", 2}, {"Cq", 2}});
    spec.clocks = {build_clock("C1", d, dt), build_clock("C2", d, dt)};
    spec.clock_terms = {{"C1", 1}, {"C2", 1}};
    spec.system_term = Operator(sys, h_s, true);
    PreparedConstraint pc(std::move(spec));

    // The transported A-local term stays clear of B and Cq in the other
    // frame, and the transported B/Cq block stays clear of A.
    Operator a_term(SpaceLayout({{"A", 2}}), pauli_x_mat(), true);
    Operator a_moved = transform_observable(a_term, pc, "C1", 0.0, "C2", 0.0);
    CHECK(support_norm(a_moved, "B") < 1e-8);
    CHECK(support_norm(a_moved, "Cq") < 1e-8);

    Operator bc_term(SpaceLayout({{"B", 2}, {"Cq", 2}}),
                     Matrix((h_s - lift(pauli_x_mat(), "A"))
                                .block(0, 0, 4, 4)),  // B (x) Cq block at A = |0>
                     true);
    Operator bc_moved = transform_observable(bc_term, pc, "C1", 0.0, "C2", 0.0);
    CHECK(support_norm(bc_moved, "A") < 1e-8);
  }

  // An observable on Cq alone spreads onto B only when the coupling fails to
  // commute with it.
  auto spread_onto_b = [&](const Matrix& h_s) {
    ConstraintSpec spec;
    spec.layout = SpaceLayout({{"C1", d}, {"C2", d}, {"A", 2}, {"B", 2}, {"Cq", 2}});
    spec.clocks = {build_clock("C1", d, dt), build_clock("C2", d, dt)};
    spec.clock_terms = {{"C1", 1}, {"C2", 1}};
    spec.system_term = Operator(sys, h_s, true);
    PreparedConstraint pc(std::move(spec));
    Operator o_c(SpaceLayout({{"Cq", 2}}), pauli_z_mat(), true);
    Operator moved = transform_observable(o_c, pc, "C1", 0.0, "C2", 0.0);
    return support_norm(moved, "B");
  };
  CHECK(spread_onto_b(h_commuting) < 1e-8);
  CHECK(spread_onto_b(h_noncommuting) > 1e-6);
}

TEST_CASE("conditional norms are reading-independent for kick-free constraints") {
  const int d = 12;
  TwoClockQubit sc(d, 1, ProfileSpec::gaussian(0.0, 2 * (2 * kPi / d)));
  PreparedConstraint pc(sc.spec);
  PhysicalState psi = kinematical_to_physical(pc, sc.kin, "C1", 0.0);
  for (int k = 0; k < d; ++k) {
    ConditionalState cond = reduce(psi, sc.c1, sc.c1.grid_time(k));
    CHECK(std::abs(cond.state.norm() - 1.0) < 1e-10);
  }
}
