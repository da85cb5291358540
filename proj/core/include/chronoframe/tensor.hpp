#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "chronoframe/layout.hpp"

namespace chronoframe {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-12;

// Dense state over a labeled tensor-product space.
struct StateVector {
  SpaceLayout layout;
  Vector amps;
  bool normalized = false;

  StateVector() = default;
  StateVector(SpaceLayout lay, Vector a, bool assert_normalized = false);

  double norm() const { return amps.norm(); }
};

// Dense operator over a labeled tensor-product space.
struct Operator {
  SpaceLayout layout;
  Matrix mat;
  bool hermitian_hint = false;

  Operator() = default;
  Operator(SpaceLayout lay, Matrix m, bool hermitian = false);

  long dim() const { return mat.rows(); }
};

Operator identity(const SpaceLayout& layout);

// Kronecker product; layout is the concatenation of the factor lists.
Operator kron(const Operator& a, const Operator& b);

// Trace out every factor not named in `keep`. Preserves the trace. The input
// must be Hermitian PSD to 1e-10 unless `general` is set.
Operator partial_trace(const Operator& rho, const std::vector<std::string>& keep,
                       bool general = false);

struct Eigh {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // columns
};

// Hermitian eigendecomposition A = V diag(values) V^dagger.
Eigh eigh(const Operator& a);

// exp(-i t H) for Hermitian H, computed spectrally so the result is unitary
// up to round-off.
Operator expm_hermitian_generator(const Operator& h, double t);
Matrix expm_hermitian_generator(const Matrix& h, double t);

// Lift an operator on a subset of factors to the full layout (identity on the
// rest). The operator's factors must appear in the full layout in the same
// relative order.
Operator embed(const Operator& op, const SpaceLayout& full);

StateVector apply(const Operator& op, const StateVector& v);

// Contract one factor against a time/computational basis index: <k|_factor v.
// The result lives on the layout with that factor removed, order preserved.
StateVector contract_factor(const StateVector& v, const std::string& label, long k);

// Inverse of contract_factor up to zero padding: |k>_factor (x) v, with the
// factor inserted at position `pos` of the resulting layout.
StateVector insert_factor(const StateVector& v, std::size_t pos, const Factor& f, long k);

// Deviation of `op` from acting trivially on the given factor, measured as the
// max-abs norm of op minus its trivial-on-that-factor part.
double support_norm(const Operator& op, const std::string& label);

double max_abs(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol);

// |<a|b>|^2 / (|a|^2 |b|^2), the squared overlap of two rays.
double fidelity(const Vector& a, const Vector& b);

// Half the trace norm of rho - sigma.
double trace_distance(const Matrix& rho, const Matrix& sigma);

}  // namespace chronoframe
