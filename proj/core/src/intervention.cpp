#include "chronoframe/intervention.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

namespace chronoframe {

namespace {

constexpr double kTieTol = 1e-12;

Matrix spectral_phase(const Eigh& eig, double t) {
  Vector phases(eig.values.size());
  for (long i = 0; i < phases.size(); ++i) {
    phases(i) = std::polar(1.0, -t * eig.values(i));
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

struct FlowEvent {
  double u;
  const Matrix* m;
};

// Ordered product of free segments and kick dilations along the flow from 0
// to s. A kick at flow time u belongs to the segment after u, so u = 0 is
// applied for s >= 0 and left un-applied when flowing backwards.
Matrix ordered_flow(const std::function<Matrix(double)>& free_prop, std::vector<FlowEvent> evs,
                    double s, long dim) {
  std::sort(evs.begin(), evs.end(),
            [](const FlowEvent& a, const FlowEvent& b) { return a.u < b.u; });
  if (s >= 0.0) {
    Matrix u = Matrix::Identity(dim, dim);
    double cursor = 0.0;
    for (const auto& ev : evs) {
      if (ev.u < -kTieTol || ev.u > s + kTieTol) continue;
      u = (*ev.m) * free_prop(ev.u - cursor) * u;
      cursor = ev.u;
    }
    return free_prop(s - cursor) * u;
  }
  // Backward flow: invert the forward flow from s to 0 over kicks strictly
  // inside (s, 0).
  Matrix g = Matrix::Identity(dim, dim);
  double cursor = s;
  for (const auto& ev : evs) {
    if (ev.u <= s + kTieTol || ev.u >= -kTieTol) continue;
    g = (*ev.m) * free_prop(ev.u - cursor) * g;
    cursor = ev.u;
  }
  g = free_prop(0.0 - cursor) * g;
  return g.adjoint();
}

}  // namespace

Matrix unitary_generator(const Matrix& u) {
  if (max_abs(u * u.adjoint() - Matrix::Identity(u.rows(), u.cols())) > 1e-11) {
    throw SimError(Err::NotHermitian, "unitary_generator requires a unitary input");
  }
  Eigen::ComplexSchur<Matrix> schur(u);
  if (schur.info() != Eigen::Success) {
    throw SimError(Err::Internal, "Schur decomposition failed");
  }
  // A unitary matrix is normal, so the Schur form is diagonal.
  Eigen::VectorXd theta(u.rows());
  for (long i = 0; i < u.rows(); ++i) theta(i) = std::arg(schur.matrixT()(i, i));
  Matrix k = schur.matrixU() * (-theta).cast<Complex>().asDiagonal() * schur.matrixU().adjoint();
  k = 0.5 * (k + k.adjoint()).eval();
  return k;
}

KickSchedule::KickSchedule(std::vector<KickEvent> entries, const SpaceLayout& system_layout)
    : entries_(std::move(entries)), system_layout_(system_layout) {
  std::map<std::string, double> last;
  for (const auto& e : entries_) {
    if (!is_hermitian(e.generator.mat, kHermitianTol)) {
      throw SimError(Err::NotHermitian, "kick generator is not Hermitian");
    }
    auto it = last.find(e.clock);
    if (it != last.end() && !(e.tau > it->second)) {
      throw SimError(Err::OrderNotDefined,
                     "kick times on clock '" + e.clock + "' must be strictly increasing");
    }
    last[e.clock] = e.tau;
  }
  dilations_.reserve(entries_.size());
  for (const auto& e : entries_) {
    Operator k_full = embed(e.generator, system_layout_);
    Matrix u = expm_hermitian_generator(k_full.mat, e.strength);
    if (max_abs(u * u.adjoint() - Matrix::Identity(u.rows(), u.cols())) > 1e-11) {
      throw SimError(Err::Internal, "kick dilation is not unitary");
    }
    dilations_.push_back(std::move(u));
  }
}

KickSchedule KickSchedule::restricted(const std::string& clock) const {
  std::vector<KickEvent> kept;
  for (const auto& e : entries_) {
    if (e.clock == clock) kept.push_back(e);
  }
  return KickSchedule(std::move(kept), system_layout_);
}

PiecewisePropagator::PiecewisePropagator(Operator h_s, KickSchedule schedule)
    : h_s_(std::move(h_s)), schedule_(std::move(schedule)) {
  if (!is_hermitian(h_s_.mat, 1e-10)) {
    throw SimError(Err::NotHermitian, "free generator is not Hermitian");
  }
  h_eig_ = eigh(h_s_);
}

Matrix PiecewisePropagator::free_propagator(double t) const { return spectral_phase(h_eig_, t); }

Matrix PiecewisePropagator::at(double s) const {
  std::vector<FlowEvent> evs;
  evs.reserve(schedule_.size());
  for (std::size_t i = 0; i < schedule_.size(); ++i) {
    evs.push_back({schedule_.entries()[i].tau, &schedule_.dilation(i)});
  }
  return ordered_flow([this](double t) { return free_propagator(t); }, std::move(evs), s,
                      h_s_.dim());
}

Matrix PiecewisePropagator::between(double s1, double s2) const {
  if (s2 < s1) return between(s2, s1).adjoint();

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < schedule_.size(); ++i) {
    const double u = schedule_.entries()[i].tau;
    if (u > s1 + kTieTol && u <= s2 + kTieTol) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return schedule_.entries()[a].tau < schedule_.entries()[b].tau;
  });

  Matrix u = Matrix::Identity(h_s_.dim(), h_s_.dim());
  double cursor = s1;
  for (std::size_t i : idx) {
    const double t = schedule_.entries()[i].tau;
    u = schedule_.dilation(i) * free_propagator(t - cursor) * u;
    cursor = t;
  }
  return free_propagator(s2 - cursor) * u;
}

Operator propagate_single_clock(const Operator& h_s, const KickSchedule& schedule, double s) {
  PiecewisePropagator prop(h_s, schedule);
  return Operator(h_s.layout, prop.at(s), false);
}

TwoClockPropagator::TwoClockPropagator(Operator h_s, KickEvent kick_a, KickEvent kick_b)
    : tau_a_(kick_a.tau), tau_b_(kick_b.tau), base_(h_s, KickSchedule({}, h_s.layout)) {
  Operator ka = embed(kick_a.generator, h_s.layout);
  Operator kb = embed(kick_b.generator, h_s.layout);
  u_a_ = expm_hermitian_generator(ka.mat, kick_a.strength);
  u_b_ = expm_hermitian_generator(kb.mat, kick_b.strength);
}

int TwoClockPropagator::branch(double s, double t2) const {
  const double ua = crossing_a();
  const double ub = crossing_b(t2);
  const bool a_active = ua >= -kTieTol && ua <= s + kTieTol;
  const bool b_active = ub >= -kTieTol && ub <= s + kTieTol;
  if (!a_active && !b_active) return 1;
  if (b_active && !a_active) return 2;
  if (a_active && !b_active) return 4;
  return ub <= ua + kTieTol ? 3 : 5;
}

Matrix TwoClockPropagator::at(double s, double t2) const {
  std::vector<FlowEvent> evs = {{crossing_a(), &u_a_}, {crossing_b(t2), &u_b_}};
  return ordered_flow([this](double t) { return base_.free_propagator(t); }, std::move(evs), s,
                      u_a_.rows());
}

Operator propagate_two_clock(const Operator& h_s, const KickEvent& kick_a,
                             const KickEvent& kick_b, double s, double t2) {
  TwoClockPropagator prop(h_s, kick_a, kick_b);
  return Operator(h_s.layout, prop.at(s, t2), false);
}

namespace {

// Split a product state across its leading factor. Throws when the state is
// not rank one across that cut.
struct FactorSplit {
  Vector factor;
  Vector rest;
};

FactorSplit split_leading_factor(const Vector& amps, long d_factor) {
  const long rest_dim = amps.size() / d_factor;
  Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      amps.data(), d_factor, rest_dim);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double tail = 0.0;
  for (long i = 1; i < sv.size(); ++i) tail += sv(i) * sv(i);
  if (tail > 1e-20 * sv(0) * sv(0) + 1e-24) {
    throw SimError(Err::UnsupportedKinematicalForm,
                   "kinematical state does not factorize across the clock cut");
  }
  FactorSplit out;
  out.factor = svd.matrixU().col(0);
  out.rest = sv(0) * svd.matrixV().col(0).conjugate();
  return out;
}

}  // namespace

ConditionalState conditional_with_kicks(const ConstraintSpec& spec, const StateVector& kin,
                                        const std::string& clock, double tau) {
  spec.validate();
  if (!(kin.layout == spec.layout)) {
    throw SimError(Err::UnsupportedKinematicalForm, "kinematical state layout mismatch");
  }
  if (spec.clock_terms.empty() || spec.clock_terms.size() > 2) {
    throw SimError(Err::UnsupportedKinematicalForm,
                   "kicked conditionals support one or two clocks");
  }
  for (const auto& term : spec.clock_terms) {
    if (term.sign != 1) {
      throw SimError(Err::UnsupportedKinematicalForm,
                     "kicked conditionals require forward clock terms");
    }
  }

  const std::string& c1_label = spec.clock_terms[0].label;
  const ClockModel& c1 = spec.clock(c1_label);
  if (spec.layout.require(c1_label) != 0) {
    throw SimError(Err::UnsupportedKinematicalForm,
                   "the timing clock must be the leading factor of the layout");
  }

  // Factor the kinematical state: |0>_C1 (x) [profile_C2] (x) |phi_0>.
  FactorSplit c1_split = split_leading_factor(kin.amps, c1.dim());
  {
    Eigen::Index max_i;
    c1_split.factor.cwiseAbs().maxCoeff(&max_i);
    Vector expected = Vector::Zero(c1.dim());
    expected(max_i) = c1_split.factor(max_i) / std::abs(c1_split.factor(max_i));
    if ((c1_split.factor - expected).norm() > 1e-10 || max_i != 0) {
      throw SimError(Err::UnsupportedKinematicalForm,
                     "the first clock must sit sharply at reading 0");
    }
  }

  const bool two_clock = spec.clock_terms.size() == 2;
  Vector profile;
  Vector phi0;
  const ClockModel* c2 = nullptr;
  if (two_clock) {
    const std::string& c2_label = spec.clock_terms[1].label;
    c2 = &spec.clock(c2_label);
    if (spec.layout.require(c2_label) != 1) {
      throw SimError(Err::UnsupportedKinematicalForm,
                     "the second clock must directly follow the first in the layout");
    }
    FactorSplit c2_split = split_leading_factor(c1_split.rest, c2->dim());
    profile = c2_split.factor;
    phi0 = c2_split.rest;
  } else {
    phi0 = c1_split.rest;
  }
  const double phi0_norm = phi0.norm();
  if (phi0_norm < 1e-14) {
    throw SimError(Err::UnsupportedKinematicalForm,
                   "system part of the kinematical state is null");
  }
  phi0 /= phi0_norm;
  if (two_clock) profile /= profile.norm();

  std::vector<std::string> sys_labels = spec.system_labels();
  SpaceLayout sys_layout = spec.layout.subset(sys_labels);
  Operator h_s = identity(sys_layout);
  h_s.mat.setZero();
  if (spec.system_term) h_s = embed(*spec.system_term, sys_layout);

  std::vector<KickEvent> events;
  for (const auto& kt : spec.kick_terms) {
    if (!kt.instantaneous()) {
      throw SimError(Err::UnsupportedKinematicalForm,
                     "conditional_with_kicks handles instantaneous kicks only");
    }
    const auto& inst = std::get<InstantaneousKick>(kt.profile);
    events.push_back(KickEvent{kt.clock, inst.tau, kt.generator, inst.strength});
  }
  KickSchedule schedule(events, sys_layout);
  Eigh h_eig = eigh(h_s);
  auto free_prop = [&](double t) { return spectral_phase(h_eig, t); };

  // Flow propagator at offset t2 between the clocks: kicks timed by the
  // second clock cross at tau - t2.
  auto flow = [&](double s, double t2) {
    std::vector<FlowEvent> evs;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const auto& e = schedule.entries()[i];
      const double u = (two_clock && e.clock == c2->label()) ? e.tau - t2 : e.tau;
      evs.push_back({u, &schedule.dilation(i)});
    }
    return ordered_flow(free_prop, std::move(evs), s, sys_layout.dim());
  };

  if (!two_clock) {
    if (clock != c1_label) {
      throw SimError(Err::UnknownFactor, "conditioning clock is not part of the constraint");
    }
    const double s = c1.wrap_time(tau);
    Vector amps = flow(s, 0.0) * phi0;
    return ConditionalState{clock, s, StateVector(sys_layout, std::move(amps))};
  }

  const bool on_c1 = (clock == c1_label);
  if (!on_c1 && clock != c2->label()) {
    throw SimError(Err::UnknownFactor, "conditioning clock is not part of the constraint");
  }
  const ClockModel& kept_clock = on_c1 ? *c2 : c1;
  SpaceLayout out_layout = SpaceLayout::concat(kept_clock.layout(), sys_layout);

  const double tau_w = (on_c1 ? c1 : *c2).wrap_time(tau);
  Vector out = Vector::Zero(out_layout.dim());
  const long sys_dim = sys_layout.dim();
  for (int k = 0; k < c2->dim(); ++k) {
    const Complex w = profile(k);
    if (std::abs(w) < 1e-300) continue;
    // Grid times of the delocalized clock read as signed offsets around 0.
    double t2 = c2->grid_time(k);
    if (t2 > c2->period() / 2.0) t2 -= c2->period();

    long kept_index;
    double s;
    if (on_c1) {
      s = tau_w;
      kept_index = c2->grid_index(tau_w + t2);
    } else {
      s = tau_w - t2;
      kept_index = c1.grid_index(s);
    }
    Vector sys = flow(s, t2) * phi0;
    out.segment(kept_index * sys_dim, sys_dim) += w * sys;
  }
  StateVector out_state(out_layout, std::move(out));
  const double n = out_state.norm();
  if (n < 1e-14) {
    throw SimError(Err::DegenerateNormalization, "conditional state is numerically null");
  }
  out_state.amps /= n;
  return ConditionalState{clock, tau_w, std::move(out_state)};
}

Operator finite_width_validator(const ClockModel& clock, const Operator& h_s, double sigma,
                                double tau_bar, const Operator& k, double s) {
  if (sigma < 2.0 * clock.dt()) {
    throw SimError(Err::UnresolvableWidth,
                   "kick width " + std::to_string(sigma) + " is below 2*dt");
  }
  Operator k_full = (k.layout == h_s.layout) ? k : embed(k, h_s.layout);
  if (!is_hermitian(k_full.mat, 1e-10)) {
    throw SimError(Err::NotHermitian, "kick generator is not Hermitian");
  }
  const int d = clock.dim();
  const double dt = clock.dt();
  const double p = clock.period();

  // Normalized kick intensity on the grid: sum_k f_k dt = 1.
  Eigen::VectorXd f(d);
  for (int j = 0; j < d; ++j) {
    double acc = 0.0;
    for (int w = -3; w <= 3; ++w) {
      double x = clock.grid_time(j) - tau_bar + w * p;
      acc += std::exp(-x * x / (2.0 * sigma * sigma));
    }
    f(j) = acc;
  }
  f /= f.sum() * dt;

  Eigh h_eig = eigh(h_s);
  auto free_prop = [&](double t) { return spectral_phase(h_eig, t); };

  // Interaction picture: U(s) = e^{-i s H} T-prod_k e^{-i dt f_k K(t_k)}.
  Matrix prod = Matrix::Identity(h_s.dim(), h_s.dim());
  for (int j = 0; j < d; ++j) {
    const double t = clock.grid_time(j);
    if (t > s + kTieTol) break;
    if (f(j) * dt < 1e-300) continue;
    Matrix k_t = free_prop(-t) * k_full.mat * free_prop(t);
    k_t = 0.5 * (k_t + k_t.adjoint()).eval();
    prod = expm_hermitian_generator(k_t, dt * f(j)) * prod;
  }
  return Operator(h_s.layout, free_prop(s) * prod, false);
}

}  // namespace chronoframe
