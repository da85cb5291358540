#include "chronoframe/clock.hpp"

#include <cmath>
#include <numbers>

namespace chronoframe {

namespace {
constexpr double kGridSnapTol = 1e-9;
}

ClockModel::ClockModel(std::string label, int d, double dt, int direction)
    : label_(std::move(label)), d_(d), dt_(dt), direction_(direction) {
  if (d_ < 2) {
    throw SimError(Err::InvalidDimension,
                   "clock '" + label_ + "' needs d >= 2, got " + std::to_string(d_));
  }
  if (!(dt_ > 0.0)) {
    throw SimError(Err::InvalidDimension, "clock '" + label_ + "' needs dt > 0");
  }
  if (direction_ != 1 && direction_ != -1) {
    throw SimError(Err::InvalidDimension, "clock direction must be +1 or -1");
  }
}

int ClockModel::symmetric_index(int n) const {
  return n >= (d_ + 1) / 2 ? n - d_ : n;
}

Operator ClockModel::hamiltonian() const {
  const double omega = 2.0 * std::numbers::pi / period();
  // H = F diag(E_n) F^dagger with F_{kn} = <t_k|E_n> = e^{i omega n t_k}/sqrt(d).
  Matrix f(d_, d_);
  Vector energies(d_);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d_));
  for (int n = 0; n < d_; ++n) {
    energies(n) = direction_ * omega * symmetric_index(n);
    for (int k = 0; k < d_; ++k) {
      f(k, n) = std::polar(inv_sqrt_d, omega * n * grid_time(k));
    }
  }
  Matrix h = f * energies.asDiagonal() * f.adjoint();
  // Round off the imaginary dust so the Hermitian hint holds exactly.
  h = 0.5 * (h + h.adjoint()).eval();
  return Operator(layout(), std::move(h), true);
}

bool ClockModel::on_grid(double tau) const {
  double r = wrap_time(tau) / dt_;
  return std::abs(r - std::round(r)) < kGridSnapTol;
}

int ClockModel::grid_index(double tau) const {
  double r = wrap_time(tau) / dt_;
  long k = std::lround(r);
  if (std::abs(r - k) >= kGridSnapTol) {
    throw SimError(Err::OffGridTime, "time " + std::to_string(tau) + " is not on the grid of clock '" +
                                         label_ + "' (dt = " + std::to_string(dt_) + ")");
  }
  return wrap_index(static_cast<int>(k));
}

double ClockModel::wrap_time(double tau) const {
  const double p = period();
  double r = std::fmod(tau, p);
  if (r < 0.0) r += p;
  // Snap exact-period multiples back to zero.
  if (p - r < kGridSnapTol * dt_) r = 0.0;
  return r;
}

ClockModel build_clock(const std::string& label, int d, double dt, int direction) {
  ClockModel c(label, d, dt, direction);
  // Verify the discrete covariance e^{-iH dt}|t_k> = |t_{k+direction}>.
  Operator u = expm_hermitian_generator(c.hamiltonian(), dt);
  for (int k = 0; k < d; ++k) {
    Vector tk = Vector::Zero(d);
    tk(k) = 1.0;
    Vector shifted = u.mat * tk;
    int kp = ((k + direction) % d + d) % d;
    shifted(kp) -= 1.0;
    if (shifted.norm() > 1e-12 * d) {
      throw SimError(Err::Internal, "clock covariance check failed for '" + label + "'");
    }
  }
  return c;
}

Operator time_operator(const ClockModel& c) {
  Vector diag(c.dim());
  for (int k = 0; k < c.dim(); ++k) diag(k) = c.grid_time(k);
  Matrix m = diag.asDiagonal();
  return Operator(c.layout(), std::move(m), true);
}

DelocalizationProfile build_profile(const ClockModel& c, const ProfileSpec& spec) {
  const int d = c.dim();
  const double p = c.period();
  Eigen::VectorXcd samples = Eigen::VectorXcd::Zero(d);
  double continuum_norm_sq = 1.0;

  switch (spec.kind) {
    case ProfileKind::kronecker: {
      samples(c.grid_index(spec.center)) = 1.0;
      // A grid kronecker stands in for a delta function, whose continuum
      // squared-norm is delta(0) ~ 1/dt.
      continuum_norm_sq = 1.0 / c.dt();
      break;
    }
    case ProfileKind::gaussian:
    case ProfileKind::bimodal: {
      if (!(spec.sigma > 0.0)) {
        throw SimError(Err::InvalidWidth, "profile width must be positive");
      }
      auto gauss = [&](double t, double center) {
        double acc = 0.0;
        for (int w = -3; w <= 3; ++w) {
          double x = t - center + w * p;
          acc += std::exp(-x * x / (4.0 * spec.sigma * spec.sigma));
        }
        return acc;
      };
      for (int k = 0; k < d; ++k) {
        double t = c.grid_time(k);
        if (spec.kind == ProfileKind::gaussian) {
          samples(k) = gauss(t, spec.center);
        } else {
          samples(k) = gauss(t, spec.center + spec.offset) + gauss(t, spec.center - spec.offset);
        }
      }
      double n2 = samples.squaredNorm();
      if (n2 <= 0.0) {
        throw SimError(Err::InvalidWidth, "profile vanishes on the grid");
      }
      samples /= std::sqrt(n2);
      continuum_norm_sq = 1.0;
      break;
    }
  }
  return DelocalizationProfile{spec, std::move(samples), continuum_norm_sq};
}

}  // namespace chronoframe
