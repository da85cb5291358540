#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "chronoframe/clock.hpp"
#include "chronoframe/tensor.hpp"

namespace chronoframe {

struct ClockTerm {
  std::string label;
  int sign = 1;
};

// Marker for a kick treated as delta(T - tau) in the propagator. Such terms
// are never exponentiated as part of the constraint matrix; they are compiled
// into piecewise propagators by the intervention engine.
struct InstantaneousKick {
  double tau = 0.0;
  double strength = 1.0;
};

struct KickTerm {
  std::string clock;
  // Either f sampled on the clock grid (units 1/time) or the delta marker.
  std::variant<Eigen::VectorXd, InstantaneousKick> profile;
  Operator generator;  // Hermitian, on a subset of the system factors

  bool instantaneous() const { return std::holds_alternative<InstantaneousKick>(profile); }
};

struct ConstraintSpec {
  SpaceLayout layout;
  std::vector<ClockModel> clocks;
  std::vector<ClockTerm> clock_terms;
  std::optional<Operator> system_term;
  std::vector<KickTerm> kick_terms;

  const ClockModel& clock(const std::string& label) const;
  bool has_instantaneous_kicks() const;
  // Labels of the non-clock factors, in layout order.
  std::vector<std::string> system_labels() const;
  void validate() const;
};

// Sum of embedded clock terms, the system term and any finite-profile kick
// terms. Instantaneous kicks raise RequiresPropagatorPath.
Operator assemble(const ConstraintSpec& spec);

struct PhysicalState {
  enum class Method { null_space, group_average, closed_form };

  StateVector state;
  Method method = Method::null_space;
  double constraint_residual = std::numeric_limits<double>::quiet_NaN();
  bool null_flag = false;  // input was (numerically) orthogonal to the kernel
};

// Projector onto the span of eigenvectors with |eigenvalue| < tol_zero.
// Throws NoPhysicalStates when that span is empty.
Operator physical_projector(const Operator& c, double tol_zero);

// Detect a base frequency such that every eigenvalue is an integer multiple
// of it (within 1e-9 of the spectral scale). Throws NotCommensurate.
double commensurate_base(const Eigen::VectorXd& eigenvalues, double tol_zero);

// Discrete group average (1/n) sum_k e^{-i s_k C} |kin> over one group
// period. Equals the projector action when n_steps exceeds the spectral
// range over the base frequency.
PhysicalState group_average(const Operator& c, const StateVector& kin, int n_steps);
int suggested_group_steps(const Operator& c);

// Assembled constraint with cached spectral data.
class PreparedConstraint {
 public:
  explicit PreparedConstraint(ConstraintSpec spec);

  const ConstraintSpec& spec() const { return spec_; }
  const Operator& matrix() const { return c_; }
  double tol_zero() const { return tol_zero_; }
  const Eigh& spectrum() const;
  const Operator& projector() const;
  long kernel_dim() const;
  const ClockModel& clock(const std::string& label) const { return spec_.clock(label); }

 private:
  ConstraintSpec spec_;
  Operator c_;
  double tol_zero_ = 0.0;
  mutable std::optional<Eigh> eig_;
  mutable std::optional<Operator> projector_;
};

// Project a kinematical state and rescale so the conditional state at the
// given clock reading has unit norm.
PhysicalState kinematical_to_physical(const PreparedConstraint& pc, const StateVector& kin,
                                      const std::string& normalize_clock, double normalize_tau);

}  // namespace chronoframe
