#pragma once

#include <string>

#include "chronoframe/tensor.hpp"

namespace chronoframe {

// Finite cyclic approximation of an ideal clock. The computational basis of
// the clock factor is the time basis {|t_k>}, t_k = k*dt on [0, P) with
// P = d*dt. The clock Hamiltonian has spectrum direction * n * (2*pi/P) with
// the energy index n running over the symmetric window {-d/2, ..., d/2-1}
// (the window is symmetric for odd d as well), so that two matched clocks can
// host zero-sum energy pairs. At grid times the symmetric window agrees with
// the DFT index modulo the period, which keeps the discrete covariance
// e^{-i H dt} |t_k> = |t_{k+direction}> exact.
class ClockModel {
 public:
  ClockModel(std::string label, int d, double dt, int direction);

  const std::string& label() const { return label_; }
  int dim() const { return d_; }
  double dt() const { return dt_; }
  int direction() const { return direction_; }
  double period() const { return d_ * dt_; }

  SpaceLayout layout() const { return SpaceLayout({{label_, d_}}); }

  // d x d clock Hamiltonian in the time basis.
  Operator hamiltonian() const;

  double grid_time(int k) const { return wrap_index(k) * dt_; }
  // Index of an on-grid time; throws OffGridTime otherwise.
  int grid_index(double tau) const;
  bool on_grid(double tau) const;
  // Reduce a real time to the principal interval [0, P).
  double wrap_time(double tau) const;

  // Signed symmetric-window energy index of DFT index n.
  int symmetric_index(int n) const;

 private:
  int wrap_index(int k) const { return ((k % d_) + d_) % d_; }

  std::string label_;
  int d_ = 0;
  double dt_ = 0.0;
  int direction_ = 1;
};

ClockModel build_clock(const std::string& label, int d, double dt, int direction = 1);

Operator time_operator(const ClockModel& c);

enum class ProfileKind { kronecker, gaussian, bimodal };

struct ProfileSpec {
  ProfileKind kind = ProfileKind::kronecker;
  double center = 0.0;
  double sigma = 0.0;   // gaussian/bimodal
  double offset = 0.0;  // bimodal peak positions center +- offset

  static ProfileSpec kronecker(double center = 0.0) {
    return {ProfileKind::kronecker, center, 0.0, 0.0};
  }
  static ProfileSpec gaussian(double center, double sigma) {
    return {ProfileKind::gaussian, center, sigma, 0.0};
  }
  static ProfileSpec bimodal(double center, double offset, double sigma) {
    return {ProfileKind::bimodal, center, sigma, offset};
  }
};

// Normalized amplitude profile phi on the clock's time grid, wrapped
// periodically. Encodes how sharply one clock is localized relative to
// another.
struct DelocalizationProfile {
  ProfileSpec spec;
  Eigen::VectorXcd samples;  // length d, sum |phi_k|^2 = 1

  // Squared-norm of the matching continuum-normalized amplitude function,
  // i.e. 1/dt for a kronecker (delta-like) profile and ~1 for smooth ones.
  // Used by the synchronization-divergence diagnostic.
  double continuum_norm_sq = 1.0;
};

DelocalizationProfile build_profile(const ClockModel& c, const ProfileSpec& spec);

}  // namespace chronoframe
