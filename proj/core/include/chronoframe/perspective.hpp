#pragma once

#include "chronoframe/constraint.hpp"

namespace chronoframe {

// State of everything except one clock, conditioned on that clock reading tau.
struct ConditionalState {
  std::string clock;
  double tau = 0.0;
  StateVector state;  // layout = parent layout minus the clock factor
};

// <tau|_clock contraction of a physical state.
ConditionalState reduce(const StateVector& psi, const ClockModel& clock, double tau);
ConditionalState reduce(const PhysicalState& psi, const ClockModel& clock, double tau);

// Inverse reduction: projector applied to |tau>_clock (x) cond. The result is
// flagged null when cond is orthogonal to every physical reduction.
PhysicalState coreduce(const ConditionalState& cond, const PreparedConstraint& pc);

struct FrameChangeResult {
  ConditionalState state;  // renormalized
  double scale;            // norm of the raw mapped state
};

// Temporal frame change: reduce(coreduce(cond), to_clock, tau_to), output
// renormalized with the raw scale reported.
FrameChangeResult frame_change(const ConditionalState& cond, const PreparedConstraint& pc,
                               const std::string& to_clock, double tau_to);

// Conjugate a frame-local observable into another clock's frame. Expectation
// values on matched conditional states are preserved. `obs` lives on the
// from-frame layout (or a subset of it, in which case it is embedded).
Operator transform_observable(const Operator& obs, const PreparedConstraint& pc,
                              const std::string& from_clock, double tau_from,
                              const std::string& to_clock, double tau_to);

// Max over interior grid points of the central-difference Schrodinger
// residual || i (psi(t+dt)-psi(t-dt))/(2 dt) - H_rest psi(t) ||.
double schrodinger_residual(const PhysicalState& psi, const ClockModel& clock,
                            const Operator& h_rest);

// Density operator of the kept factors of a conditional state.
Operator reduced_subsystem_state(const ConditionalState& cond,
                                 const std::vector<std::string>& keep);

}  // namespace chronoframe
