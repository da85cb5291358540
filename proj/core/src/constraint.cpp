#include "chronoframe/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace chronoframe {

const ClockModel& ConstraintSpec::clock(const std::string& label) const {
  for (const auto& c : clocks) {
    if (c.label() == label) return c;
  }
  throw SimError(Err::UnknownFactor, "no clock labeled '" + label + "'");
}

bool ConstraintSpec::has_instantaneous_kicks() const {
  return std::any_of(kick_terms.begin(), kick_terms.end(),
                     [](const KickTerm& k) { return k.instantaneous(); });
}

std::vector<std::string> ConstraintSpec::system_labels() const {
  std::set<std::string> clock_labels;
  for (const auto& c : clocks) clock_labels.insert(c.label());
  std::vector<std::string> out;
  for (const auto& f : layout.factors()) {
    if (!clock_labels.count(f.label)) out.push_back(f.label);
  }
  return out;
}

void ConstraintSpec::validate() const {
  std::set<std::string> seen;
  for (const auto& term : clock_terms) {
    if (!seen.insert(term.label).second) {
      throw SimError(Err::LabelCollision,
                     "clock '" + term.label + "' appears twice in the constraint");
    }
    const ClockModel& c = clock(term.label);
    std::size_t pos = layout.require(term.label);
    if (layout.factor(pos).dim != c.dim()) {
      throw SimError(Err::InvalidDimension, "layout dimension of clock '" + term.label +
                                                "' does not match its model");
    }
    if (term.sign != 1 && term.sign != -1) {
      throw SimError(Err::InvalidDimension, "clock term sign must be +1 or -1");
    }
  }
  for (const auto& c : clocks) {
    if (!seen.count(c.label())) {
      throw SimError(Err::UnknownFactor,
                     "clock '" + c.label() + "' has no term in the constraint");
    }
  }
  if (system_term) {
    for (const auto& f : system_term->layout.factors()) layout.require(f.label);
    if (!is_hermitian(system_term->mat, kHermitianTol)) {
      throw SimError(Err::NotHermitian, "system term is not Hermitian");
    }
  }
  for (const auto& kick : kick_terms) {
    const ClockModel& c = clock(kick.clock);
    if (!is_hermitian(kick.generator.mat, kHermitianTol)) {
      throw SimError(Err::NotHermitian, "kick generator is not Hermitian");
    }
    for (const auto& f : kick.generator.layout.factors()) layout.require(f.label);
    if (const auto* f = std::get_if<Eigen::VectorXd>(&kick.profile)) {
      if (f->size() != c.dim()) {
        throw SimError(Err::InvalidDimension,
                       "kick profile length does not match the clock grid");
      }
    } else {
      const auto& inst = std::get<InstantaneousKick>(kick.profile);
      c.grid_index(inst.tau);  // OffGridTime if off the grid
    }
  }
}

Operator assemble(const ConstraintSpec& spec) {
  spec.validate();
  if (spec.has_instantaneous_kicks()) {
    throw SimError(Err::RequiresPropagatorPath,
                   "instantaneous kicks are handled by the intervention engine, "
                   "not by direct assembly");
  }

  const long dim = spec.layout.dim();
  Matrix c = Matrix::Zero(dim, dim);
  for (const auto& term : spec.clock_terms) {
    const ClockModel& model = spec.clock(term.label);
    Operator h = model.hamiltonian();
    c += static_cast<double>(term.sign) * embed(h, spec.layout).mat;
  }
  if (spec.system_term) {
    c += embed(*spec.system_term, spec.layout).mat;
  }
  for (const auto& kick : spec.kick_terms) {
    const auto& f = std::get<Eigen::VectorXd>(kick.profile);
    const ClockModel& model = spec.clock(kick.clock);
    Operator k_full = embed(kick.generator, spec.layout);
    // f(T) (x) K is K_full with each row/column scaled by f at the clock
    // digit; K_full is already block-diagonal in that digit.
    std::size_t pos = spec.layout.require(kick.clock);
    const long stride = spec.layout.stride(pos);
    const long d = model.dim();
    for (long i = 0; i < dim; ++i) {
      const long ki = (i / stride) % d;
      for (long j = 0; j < dim; ++j) {
        if (k_full.mat(i, j) != Complex(0.0, 0.0)) {
          c(i, j) += f(ki) * k_full.mat(i, j);
        }
      }
    }
  }
  c = 0.5 * (c + c.adjoint()).eval();
  return Operator(spec.layout, std::move(c), true);
}

Operator physical_projector(const Operator& c, double tol_zero) {
  Eigh eig = eigh(c);
  std::vector<long> kernel;
  for (long i = 0; i < eig.values.size(); ++i) {
    if (std::abs(eig.values(i)) < tol_zero) kernel.push_back(i);
  }
  if (kernel.empty()) {
    throw SimError(Err::NoPhysicalStates, "the constraint has an empty null space");
  }
  Matrix v0(c.dim(), static_cast<long>(kernel.size()));
  for (std::size_t j = 0; j < kernel.size(); ++j) v0.col(j) = eig.vectors.col(kernel[j]);
  Matrix p = v0 * v0.adjoint();
  p = 0.5 * (p + p.adjoint()).eval();
  return Operator(c.layout, std::move(p), true);
}

double commensurate_base(const Eigen::VectorXd& eigenvalues, double tol_zero) {
  const double scale = std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;

  auto gcd_real = [tol](double a, double b) {
    while (b > tol) {
      double r = std::fmod(a, b);
      if (r > b - tol || r < tol) r = 0.0;  // snap near-multiples
      a = b;
      b = r;
    }
    return a;
  };

  // Real gcd over the nonzero eigenvalue magnitudes.
  double g = 0.0;
  for (long i = 0; i < eigenvalues.size(); ++i) {
    double x = std::abs(eigenvalues(i));
    if (x < tol_zero) continue;
    g = (g == 0.0) ? x : gcd_real(std::max(g, x), std::min(g, x));
  }
  if (g <= tol) {
    throw SimError(Err::NotCommensurate, "constraint spectrum has no usable base frequency");
  }
  for (long i = 0; i < eigenvalues.size(); ++i) {
    if (std::abs(eigenvalues(i)) < tol_zero) continue;
    double r = eigenvalues(i) / g;
    if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, std::abs(r))) {
      throw SimError(Err::NotCommensurate,
                     "eigenvalue " + std::to_string(eigenvalues(i)) +
                         " is not an integer multiple of the base frequency");
    }
  }
  return g;
}

PhysicalState group_average(const Operator& c, const StateVector& kin, int n_steps) {
  if (!(kin.layout == c.layout)) {
    throw SimError(Err::UnknownFactor, "kinematical state layout does not match the constraint");
  }
  if (n_steps < 1) {
    throw SimError(Err::InvalidDimension, "group average needs at least one step");
  }
  Eigh eig = eigh(c);
  const double tol_zero = 1e-9 * std::max(1.0, max_abs(c.mat));
  const double base = commensurate_base(eig.values, tol_zero);
  const double period = 2.0 * std::numbers::pi / base;

  // (1/n) sum_k exp(-i s_k lambda) applied spectrally.
  Vector filter(eig.values.size());
  for (long i = 0; i < eig.values.size(); ++i) {
    Complex acc = 0.0;
    for (int k = 0; k < n_steps; ++k) {
      acc += std::polar(1.0, -eig.values(i) * period * k / n_steps);
    }
    filter(i) = acc / static_cast<double>(n_steps);
  }
  Vector out = eig.vectors * (filter.asDiagonal() * (eig.vectors.adjoint() * kin.amps));

  PhysicalState ps;
  ps.method = PhysicalState::Method::group_average;
  ps.null_flag = out.norm() < 1e-12 * std::max(1.0, kin.norm());
  double residual = (c.mat * out).norm();
  ps.constraint_residual = ps.null_flag ? 0.0 : residual / out.norm();
  ps.state = StateVector(c.layout, std::move(out));
  return ps;
}

int suggested_group_steps(const Operator& c) {
  Eigh eig = eigh(c);
  const double tol_zero = 1e-9 * std::max(1.0, max_abs(c.mat));
  const double base = commensurate_base(eig.values, tol_zero);
  return 2 * static_cast<int>(std::ceil(eig.values.cwiseAbs().maxCoeff() / base)) + 1;
}

PreparedConstraint::PreparedConstraint(ConstraintSpec spec)
    : spec_(std::move(spec)), c_(assemble(spec_)) {
  tol_zero_ = 1e-9 * std::max(1.0, max_abs(c_.mat));
}

const Eigh& PreparedConstraint::spectrum() const {
  if (!eig_) eig_ = eigh(c_);
  return *eig_;
}

const Operator& PreparedConstraint::projector() const {
  if (!projector_) {
    const Eigh& eig = spectrum();
    std::vector<long> kernel;
    for (long i = 0; i < eig.values.size(); ++i) {
      if (std::abs(eig.values(i)) < tol_zero_) kernel.push_back(i);
    }
    if (kernel.empty()) {
      throw SimError(Err::NoPhysicalStates, "the constraint has an empty null space");
    }
    Matrix v0(c_.dim(), static_cast<long>(kernel.size()));
    for (std::size_t j = 0; j < kernel.size(); ++j) v0.col(j) = eig.vectors.col(kernel[j]);
    Matrix p = v0 * v0.adjoint();
    p = 0.5 * (p + p.adjoint()).eval();
    projector_ = Operator(c_.layout, std::move(p), true);
  }
  return *projector_;
}

long PreparedConstraint::kernel_dim() const {
  const Eigh& eig = spectrum();
  long n = 0;
  for (long i = 0; i < eig.values.size(); ++i) {
    if (std::abs(eig.values(i)) < tol_zero_) ++n;
  }
  return n;
}

PhysicalState kinematical_to_physical(const PreparedConstraint& pc, const StateVector& kin,
                                      const std::string& normalize_clock, double normalize_tau) {
  const ClockModel& clock = pc.clock(normalize_clock);
  PhysicalState ps;
  ps.method = PhysicalState::Method::null_space;
  Vector projected = pc.projector().mat * kin.amps;
  StateVector raw(pc.matrix().layout, std::move(projected));

  StateVector cond = contract_factor(raw, normalize_clock, clock.grid_index(normalize_tau));
  const double n = cond.norm();
  if (n < 1e-12 * std::max(1.0, kin.norm())) {
    throw SimError(Err::DegenerateNormalization,
                   "conditional state vanishes at the normalization reading");
  }
  raw.amps /= n;
  double residual = (pc.matrix().mat * raw.amps).norm() / raw.amps.norm();
  if (pc.spec().kick_terms.empty() && residual > 1e-8) {
    throw SimError(Err::Internal, "physical state violates the constraint residual bound");
  }
  ps.constraint_residual = residual;
  ps.state = std::move(raw);
  return ps;
}

}  // namespace chronoframe
