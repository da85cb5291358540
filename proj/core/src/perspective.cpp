#include "chronoframe/perspective.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace chronoframe {

ConditionalState reduce(const StateVector& psi, const ClockModel& clock, double tau) {
  StateVector cond = contract_factor(psi, clock.label(), clock.grid_index(tau));
  return ConditionalState{clock.label(), clock.wrap_time(tau), std::move(cond)};
}

ConditionalState reduce(const PhysicalState& psi, const ClockModel& clock, double tau) {
  return reduce(psi.state, clock, tau);
}

PhysicalState coreduce(const ConditionalState& cond, const PreparedConstraint& pc) {
  const SpaceLayout& full = pc.matrix().layout;
  const ClockModel& clock = pc.clock(cond.clock);
  if (!(cond.state.layout == full.without(cond.clock))) {
    throw SimError(Err::UnknownFactor,
                   "conditional state layout does not match the constraint layout");
  }
  std::size_t pos = full.require(cond.clock);
  StateVector lifted = insert_factor(cond.state, pos, {cond.clock, clock.dim()},
                                     clock.grid_index(cond.tau));

  PhysicalState ps;
  ps.method = PhysicalState::Method::null_space;
  Vector projected = pc.projector().mat * lifted.amps;
  ps.null_flag = projected.norm() < 1e-12 * std::max(1.0, cond.state.norm());
  double residual = ps.null_flag ? 0.0 : (pc.matrix().mat * projected).norm() / projected.norm();
  ps.constraint_residual = residual;
  ps.state = StateVector(full, std::move(projected));
  return ps;
}

FrameChangeResult frame_change(const ConditionalState& cond, const PreparedConstraint& pc,
                               const std::string& to_clock, double tau_to) {
  PhysicalState lifted = coreduce(cond, pc);
  if (lifted.null_flag) {
    throw SimError(Err::DegenerateNormalization,
                   "frame change of a state orthogonal to the physical space");
  }
  ConditionalState out = reduce(lifted, pc.clock(to_clock), tau_to);
  const double scale = out.state.norm();
  if (scale < 1e-14) {
    throw SimError(Err::DegenerateNormalization, "frame change produced a null state");
  }
  out.state.amps /= scale;
  return FrameChangeResult{std::move(out), scale};
}

Operator transform_observable(const Operator& obs, const PreparedConstraint& pc,
                              const std::string& from_clock, double tau_from,
                              const std::string& to_clock, double tau_to) {
  // The transported operator correlates the from-clock's readings with the
  // flow-conjugated system observable:
  //   O_to = sum_k |t_k><t_k|_{from} (x) U(u_k) O U(u_k)^dagger,
  // with U the free system flow and u_k the flow time at which the from
  // clock reads t_k, anchored at the defining reading tau_from. The result
  // does not depend on the to-clock reading, so tau_to only names the frame
  // convention.
  (void)tau_to;
  const ConstraintSpec& spec = pc.spec();
  const SpaceLayout& full = pc.matrix().layout;
  if (spec.clock_terms.size() != 2 || !spec.kick_terms.empty()) {
    throw SimError(Err::UnsupportedKinematicalForm,
                   "observable transport needs a kick-free two-clock constraint");
  }
  SpaceLayout from_layout = full.without(from_clock);
  SpaceLayout to_layout = full.without(to_clock);
  if (from_clock == to_clock) {
    throw SimError(Err::UnknownFactor, "observable transport needs two distinct frames");
  }

  Operator obs_full = (obs.layout == from_layout) ? obs : embed(obs, from_layout);
  if (!is_hermitian(obs_full.mat, 1e-10)) {
    throw SimError(Err::NotHermitian, "transform_observable requires a Hermitian observable");
  }
  if (support_norm(obs_full, to_clock) > 1e-12) {
    throw SimError(Err::UnsupportedKinematicalForm,
                   "observable transport handles system-local observables only");
  }
  if (to_layout.require(from_clock) != 0) {
    throw SimError(Err::UnsupportedKinematicalForm,
                   "observable transport expects clock factors to lead the layout");
  }

  // Restrict to the system factors.
  std::vector<std::string> sys_labels = spec.system_labels();
  SpaceLayout sys_layout = full.subset(sys_labels);
  const ClockModel& to_model = pc.clock(to_clock);
  Operator o_sys = partial_trace(obs_full, sys_labels, /*general=*/true);
  o_sys.mat /= static_cast<double>(to_model.dim());

  Operator h_sys = identity(sys_layout);
  h_sys.mat.setZero();
  if (spec.system_term) h_sys = embed(*spec.system_term, sys_layout);
  Eigh h_eig = eigh(h_sys);

  const ClockModel& from_model = pc.clock(from_clock);
  int flow_sign = from_model.direction();
  for (const auto& term : spec.clock_terms) {
    if (term.label == from_clock) flow_sign *= term.sign;
  }

  const long sys_dim = sys_layout.dim();
  Matrix out = Matrix::Zero(to_layout.dim(), to_layout.dim());
  for (int k = 0; k < from_model.dim(); ++k) {
    const double u = flow_sign * (from_model.grid_time(k) - tau_from);
    Vector phases(h_eig.values.size());
    for (long i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -u * h_eig.values(i));
    Matrix flow = h_eig.vectors * phases.asDiagonal() * h_eig.vectors.adjoint();
    out.block(k * sys_dim, k * sys_dim, sys_dim, sys_dim) =
        flow * o_sys.mat * flow.adjoint();
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return Operator(to_layout, std::move(out), true);
}

double schrodinger_residual(const PhysicalState& psi, const ClockModel& clock,
                            const Operator& h_rest) {
  const SpaceLayout cond_layout = psi.state.layout.without(clock.label());
  Operator h = (h_rest.layout == cond_layout) ? h_rest : embed(h_rest, cond_layout);

  const int d = clock.dim();
  const double dt = clock.dt();
  std::vector<Vector> cond(d);
  for (int k = 0; k < d; ++k) {
    cond[k] = contract_factor(psi.state, clock.label(), k).amps;
  }
  double worst = 0.0;
  for (int k = 1; k + 1 < d; ++k) {
    Vector deriv = Complex(0.0, 1.0) * (cond[k + 1] - cond[k - 1]) / (2.0 * dt);
    worst = std::max(worst, (deriv - h.mat * cond[k]).norm());
  }
  return worst;
}

Operator reduced_subsystem_state(const ConditionalState& cond,
                                 const std::vector<std::string>& keep) {
  Matrix proj = cond.state.amps * cond.state.amps.adjoint();
  Operator rho(cond.state.layout, std::move(proj), true);
  return partial_trace(rho, keep);
}

}  // namespace chronoframe
