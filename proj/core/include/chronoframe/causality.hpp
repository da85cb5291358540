#pragma once

#include <map>

#include "chronoframe/intervention.hpp"

namespace chronoframe {

// 2x2 gate constants.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix hadamard();
Matrix s_gate();

// Built-in Hamiltonians on qubit factors A, B.
Operator two_qubit_free_hamiltonian();         // X (x) 1 + 1 (x) X
Operator two_qubit_interacting_hamiltonian();  // X (x) X
Operator zero_hamiltonian(const SpaceLayout& system);

// Kick generator whose dilation is the Hadamard gate (up to global phase).
Matrix hadamard_kick_generator();
// Kick generator whose dilation is exactly the given Pauli.
Matrix pauli_kick_generator(char axis);
// Von Neumann coupling recording the target's Pauli-y basis on the ancilla:
// a controlled basis rotation with e^{-iK}|+-y>|0> = |+-y>|+-y>.
Operator y_measurement_kick(const std::string& target, const std::string& ancilla);

struct InterventionChoice {
  std::string name;
  Matrix u;  // unitary on the intervened qubit; identity means "none"

  static InterventionChoice none();
  static InterventionChoice unitary(const std::string& name, Matrix u);
};

struct MeasurementSpec {
  std::string target;  // factor label carrying the observable
  std::vector<std::string> outcomes;
  std::vector<Matrix> projectors;  // on the target factor, resolution of identity

  static MeasurementSpec pauli_y(const std::string& target);
  void validate() const;
};

struct Distribution {
  std::vector<std::string> labels;
  std::vector<double> p;

  double total_variation(const Distribution& other) const;
  double operator[](const std::string& label) const;
};

// Clamp tiny negatives and check the distribution sums to one.
Distribution make_distribution(std::vector<std::string> labels, std::vector<double> p);

// Appendix-style signaling experiment on one timing clock: an optional
// intervention on A at t_i, a von Neumann measurement of B at t_f, readout on
// the record ancilla after t_f.
struct SignalingScenario {
  int clock_dim = 64;
  double period = 2.0 * 3.14159265358979323846;
  Matrix h_s;  // 4x4 on A (x) B
  double t_i = 0.0;
  double t_f = 0.0;

  enum class Path {
    closed_form,  // piecewise propagators with the measurement dilation
    constraint,   // discrete-clock physical state, state-choice intervention
  };
  Path path = Path::closed_form;
};

Distribution signaling_probability(const SignalingScenario& sc, const InterventionChoice& choice,
                                   const MeasurementSpec& m);
// Born probabilities on the target at t_f without the dilation, for the
// von Neumann equivalence check.
Distribution direct_born_probability(const SignalingScenario& sc, const InterventionChoice& choice,
                                     const MeasurementSpec& m);

struct SignalingReport {
  std::vector<std::pair<std::string, Distribution>> distributions;
  double max_tv = 0.0;
  double threshold = 1e-6;
  bool signaling = false;
};

SignalingReport compare_interventions(const SignalingScenario& sc,
                                      const std::vector<InterventionChoice>& choices,
                                      const MeasurementSpec& m);

// State-choice embedding of an intervention with two clocks: the operation is
// local to A in the first clock's frame; transformed into the second frame it
// spreads over other factors whenever the system Hamiltonian couples them.
struct NaiveEmbeddingReport {
  std::map<std::string, double> frame1_supports;  // per factor of frame 1
  std::map<std::string, double> frame2_supports;  // per factor of frame 2
  Distribution p_frame1;
  Distribution p_frame2;
  double prob_deviation = 0.0;
};

NaiveEmbeddingReport naive_embedding_demo(const Matrix& m_a, const Matrix& h_s, int clock_dim,
                                          const ProfileSpec& profile, double tau_i, double tau_f);

// Opposite-running clocks: distance between the composed-map prediction and
// the second frame's reduced state, small only for Hermitian dilations.
struct ReversedOrderReport {
  Matrix rho_c1;        // reduced state in the first frame at delta_tau
  Matrix rho_c2;        // reduced state in the second frame at delta_tau
  Matrix predicted_ab;  // apply E_B then E_A
  Matrix predicted_ba;  // apply E_A then E_B
  double distance_c2_vs_ab = 0.0;  // headline figure
  double distance_c1_vs_ba = 0.0;
};

ReversedOrderReport reversed_clock_ordering(const Matrix& u_a, const Matrix& u_b, double sigma,
                                            int clock_dim = 64, Vector initial = Vector());

// Physical-norm scaling with the clock dimension for synchronized versus
// smoothly delocalized clock pairs, at fixed conditional normalization in the
// continuum convention (a kronecker profile carries squared norm 1/dt).
struct SyncScanRow {
  int d = 0;
  std::string profile;  // "kronecker" | "gaussian" | "single_clock"
  double sigma = 0.0;
  double phys_norm = 0.0;
};

std::vector<SyncScanRow> sync_divergence_scan(const std::vector<int>& dims,
                                              const std::vector<double>& widths,
                                              double period);

// Physical norm of one two-clock point of the scan.
double sync_physical_norm(int d, const ProfileSpec& profile, double period);

// Two kicks timed by different clocks with a common kick reading. A bimodal
// inter-clock profile puts both orders of the kicks in play; a narrow
// unimodal profile with separated readings pins a single order.
struct SwitchReport {
  double weight_a_first_c1 = 0.0, weight_b_first_c1 = 0.0;
  double weight_a_first_c2 = 0.0, weight_b_first_c2 = 0.0;
  std::string order_c1, order_c2;  // "A_then_B" | "B_then_A" | "indefinite" | "partial"
  Vector branch_state_a_first, branch_state_b_first;  // system states per branch (frame 1)
  Complex branch_overlap;
  double interference_contrast = 0.0;  // p_sym - p_anti on mirrored clock pairs
};

SwitchReport quantum_switch_scenario(const Matrix& u_a, const Matrix& u_b, double tau_a,
                                     double tau_b, const ProfileSpec& profile, const Matrix& h_s,
                                     int clock_dim = 32);

// Hadamard intervention on A timed by the first clock, von Neumann Y
// measurement of B timed by the second; checks that both frames agree on the
// operation order and the outcome statistics.
struct TwoFrameReport {
  std::string order_c1, order_c2;
  Distribution p_c1, p_c2;
  Distribution p_single_clock;  // closed-form single-clock cross-check
  double cross_frame_deviation = 0.0;
  double vs_single_clock_deviation = 0.0;
  std::string delocalized_kick_c1;  // which kick appears time-delocalized per frame
  std::string delocalized_kick_c2;
};

TwoFrameReport two_frame_causal_consistency(const Matrix& h_s, double tau_a, double tau_b,
                                            const ProfileSpec& profile, int clock_dim = 32);

}  // namespace chronoframe
