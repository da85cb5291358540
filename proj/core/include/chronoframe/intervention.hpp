#pragma once

#include "chronoframe/perspective.hpp"

namespace chronoframe {

// One instantaneous kick: at flow time tau of its timing clock, the dilation
// e^{-i strength K} is applied to the generator's factors.
struct KickEvent {
  std::string clock;
  double tau = 0.0;
  Operator generator;
  double strength = 1.0;
};

class KickSchedule {
 public:
  KickSchedule() = default;
  // Validates that per clock the kick times are strictly increasing on the
  // principal interval and that every cached dilation is unitary.
  KickSchedule(std::vector<KickEvent> entries, const SpaceLayout& system_layout);

  const std::vector<KickEvent>& entries() const { return entries_; }
  const Matrix& dilation(std::size_t i) const { return dilations_[i]; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  KickSchedule restricted(const std::string& clock) const;

 private:
  std::vector<KickEvent> entries_;
  std::vector<Matrix> dilations_;  // embedded on the system layout
  SpaceLayout system_layout_;
};

// Free evolution under H_S interleaved with kick dilations, for kicks timed
// by a single clock. A kick at flow time u belongs to the segment after u:
// at(u) already includes it.
class PiecewisePropagator {
 public:
  PiecewisePropagator(Operator h_s, KickSchedule schedule);

  // Flow from 0 to s. For s >= 0 applies kicks with 0 <= u <= s; for s < 0
  // returns the inverse of the flow from s to 0.
  Matrix at(double s) const;
  // Flow over (s1, s2], applying kicks with s1 < u <= s2.
  Matrix between(double s1, double s2) const;

  const SpaceLayout& layout() const { return h_s_.layout; }
  Matrix free_propagator(double t) const;

 private:
  Operator h_s_;
  KickSchedule schedule_;
  Eigh h_eig_;
};

Operator propagate_single_clock(const Operator& h_s, const KickSchedule& schedule, double s);

// Two kicks timed by different clocks. In the flow parameter s of the state
// anchored at clock-1 reading 0 and clock-2 reading t2, kick A crosses at
// s = tau_a and kick B at s = tau_b - t2, so the operator product contains
// both orders of the two dilations depending on t2.
class TwoClockPropagator {
 public:
  // kick_a is timed by the first clock, kick_b by the second.
  TwoClockPropagator(Operator h_s, KickEvent kick_a, KickEvent kick_b);

  Matrix at(double s, double t2) const;

  // Branch of the five-case piecewise form:
  //   1 no kick yet, 2 only B, 3 B then A, 4 only A, 5 A then B.
  int branch(double s, double t2) const;

  const PiecewisePropagator& base() const { return base_; }

 private:
  double crossing_a() const { return tau_a_; }
  double crossing_b(double t2) const { return tau_b_ - t2; }

  double tau_a_, tau_b_;
  Matrix u_a_, u_b_;
  PiecewisePropagator base_;  // kick-free, reused for the free segments
};

Operator propagate_two_clock(const Operator& h_s, const KickEvent& kick_a,
                             const KickEvent& kick_b, double s, double t2);

// Conditional state of a kicked constraint, built as the grid sum over the
// second clock's delocalization with branch-resolved propagators. The
// kinematical state must be of the standard generating form
// |t=0>_C1 (x) sum_k phi_k |t_k>_C2 (x) |phi_0>_S (single-clock variant:
// |t=0>_C (x) |phi_0>_S).
ConditionalState conditional_with_kicks(const ConstraintSpec& spec, const StateVector& kin,
                                        const std::string& clock, double tau);

// Finite-width check of the delta-kick limit: the interaction-picture
// time-ordered product for a normalized gaussian kick profile of width sigma
// centered at tau_bar, evaluated with one substep per grid cell.
Operator finite_width_validator(const ClockModel& clock, const Operator& h_s, double sigma,
                                double tau_bar, const Operator& k, double s);

// Hermitian K with e^{-iK} = u exactly (principal branch).
Matrix unitary_generator(const Matrix& u);

}  // namespace chronoframe
