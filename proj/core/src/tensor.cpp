#include "chronoframe/tensor.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace chronoframe {

StateVector::StateVector(SpaceLayout lay, Vector a, bool assert_normalized)
    : layout(std::move(lay)), amps(std::move(a)), normalized(assert_normalized) {
  if (amps.size() != layout.dim()) {
    throw SimError(Err::InvalidDimension,
                   "amplitude length " + std::to_string(amps.size()) +
                       " does not match layout dimension " + std::to_string(layout.dim()));
  }
  if (!std::isfinite(amps.norm())) {
    throw SimError(Err::Internal, "state norm is not finite");
  }
  if (normalized && std::abs(amps.norm() - 1.0) > 1e-12) {
    throw SimError(Err::Internal, "state flagged normalized but has norm " +
                                      std::to_string(amps.norm()));
  }
}

Operator::Operator(SpaceLayout lay, Matrix m, bool hermitian)
    : layout(std::move(lay)), mat(std::move(m)), hermitian_hint(hermitian) {
  if (mat.rows() != mat.cols() || mat.rows() != layout.dim()) {
    throw SimError(Err::InvalidDimension,
                   "operator shape " + std::to_string(mat.rows()) + "x" +
                       std::to_string(mat.cols()) + " does not match layout dimension " +
                       std::to_string(layout.dim()));
  }
  if (hermitian_hint && !is_hermitian(mat, kHermitianTol)) {
    throw SimError(Err::NotHermitian, "operator flagged Hermitian violates the tolerance");
  }
}

Operator identity(const SpaceLayout& layout) {
  return Operator(layout, Matrix::Identity(layout.dim(), layout.dim()), true);
}

Operator kron(const Operator& a, const Operator& b) {
  SpaceLayout layout = SpaceLayout::concat(a.layout, b.layout);
  const long da = a.dim(), db = b.dim();
  Matrix out(da * db, da * db);
  for (long i = 0; i < da; ++i) {
    for (long j = 0; j < da; ++j) {
      out.block(i * db, j * db, db, db) = a.mat(i, j) * b.mat;
    }
  }
  return Operator(std::move(layout), std::move(out),
                  a.hermitian_hint && b.hermitian_hint);
}

Operator partial_trace(const Operator& rho, const std::vector<std::string>& keep,
                       bool general) {
  for (const auto& l : keep) rho.layout.require(l);
  if (!general) {
    if (!is_hermitian(rho.mat, 1e-10)) {
      throw SimError(Err::NotHermitian, "partial_trace input is not Hermitian to 1e-10");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.mat, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, max_abs(rho.mat))) {
      throw SimError(Err::NotHermitian,
                     "partial_trace input is not positive semidefinite to 1e-10");
    }
  }

  const auto& lay = rho.layout;
  std::vector<bool> kept(lay.factor_count(), false);
  for (const auto& l : keep) kept[lay.require(l)] = true;

  SpaceLayout keep_layout = lay.subset([&] {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < lay.factor_count(); ++i) {
      if (kept[i]) names.push_back(lay.factor(i).label);
    }
    return names;
  }());

  long keep_dim = keep_layout.dim();
  long trace_dim = lay.dim() / keep_dim;

  // Map a (kept, traced) index pair back to the full row index.
  std::vector<long> keep_pos, trace_pos;
  for (std::size_t i = 0; i < lay.factor_count(); ++i) {
    (kept[i] ? keep_pos : trace_pos).push_back(static_cast<long>(i));
  }
  auto full_index = [&](long k, long t) {
    long idx = 0;
    for (std::size_t i = keep_pos.size(); i-- > 0;) {
      long d = lay.factor(keep_pos[i]).dim;
      idx += (k % d) * lay.stride(keep_pos[i]);
      k /= d;
    }
    for (std::size_t i = trace_pos.size(); i-- > 0;) {
      long d = lay.factor(trace_pos[i]).dim;
      idx += (t % d) * lay.stride(trace_pos[i]);
      t /= d;
    }
    return idx;
  };

  Matrix out = Matrix::Zero(keep_dim, keep_dim);
  for (long i = 0; i < keep_dim; ++i) {
    for (long j = 0; j < keep_dim; ++j) {
      Complex s = 0.0;
      for (long t = 0; t < trace_dim; ++t) {
        s += rho.mat(full_index(i, t), full_index(j, t));
      }
      out(i, j) = s;
    }
  }
  return Operator(std::move(keep_layout), std::move(out), rho.hermitian_hint);
}

Eigh eigh(const Operator& a) {
  if (!is_hermitian(a.mat, 1e-10)) {
    throw SimError(Err::NotHermitian, "eigh requires a Hermitian operator");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.mat);
  if (es.info() != Eigen::Success) {
    throw SimError(Err::Internal, "eigendecomposition failed to converge");
  }
  return Eigh{es.eigenvalues(), es.eigenvectors()};
}

Matrix expm_hermitian_generator(const Matrix& h, double t) {
  if (!is_hermitian(h, 1e-10)) {
    throw SimError(Err::NotHermitian, "expm generator is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) {
    throw SimError(Err::Internal, "eigendecomposition failed to converge");
  }
  Vector phases(es.eigenvalues().size());
  for (long i = 0; i < phases.size(); ++i) {
    phases(i) = std::polar(1.0, -t * es.eigenvalues()(i));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Operator expm_hermitian_generator(const Operator& h, double t) {
  return Operator(h.layout, expm_hermitian_generator(h.mat, t), false);
}

Operator embed(const Operator& op, const SpaceLayout& full) {
  // Positions of the operator's factors inside the full layout, which must
  // preserve their relative order.
  std::vector<long> pos;
  pos.reserve(op.layout.factor_count());
  for (const auto& f : op.layout.factors()) {
    std::size_t p = full.require(f.label);
    if (full.factor(p).dim != f.dim) {
      throw SimError(Err::InvalidDimension,
                     "factor '" + f.label + "' has dimension " +
                         std::to_string(full.factor(p).dim) + " in the full layout but " +
                         std::to_string(f.dim) + " in the operator");
    }
    if (!pos.empty() && static_cast<long>(p) <= pos.back()) {
      throw SimError(Err::Internal,
                     "embed requires the operator's factor order to match the full layout");
    }
    pos.push_back(static_cast<long>(p));
  }

  std::vector<bool> on(full.factor_count(), false);
  for (long p : pos) on[p] = true;

  const long sub_dim = op.dim();
  const long full_dim = full.dim();
  const long rest_dim = full_dim / sub_dim;

  auto full_index = [&](long s, long r) {
    long idx = 0;
    long sv = s, rv = r;
    for (std::size_t i = full.factor_count(); i-- > 0;) {
      long d = full.factor(i).dim;
      long digit;
      if (on[i]) {
        digit = sv % d;
        sv /= d;
      } else {
        digit = rv % d;
        rv /= d;
      }
      idx += digit * full.stride(i);
    }
    return idx;
  };

  Matrix out = Matrix::Zero(full_dim, full_dim);
  for (long si = 0; si < sub_dim; ++si) {
    for (long sj = 0; sj < sub_dim; ++sj) {
      const Complex v = op.mat(si, sj);
      if (v == Complex(0.0, 0.0)) continue;
      for (long r = 0; r < rest_dim; ++r) {
        out(full_index(si, r), full_index(sj, r)) = v;
      }
    }
  }
  return Operator(full, std::move(out), op.hermitian_hint);
}

StateVector apply(const Operator& op, const StateVector& v) {
  if (!(op.layout == v.layout)) {
    throw SimError(Err::UnknownFactor, "operator and state layouts differ");
  }
  return StateVector(v.layout, op.mat * v.amps);
}

StateVector contract_factor(const StateVector& v, const std::string& label, long k) {
  const auto& lay = v.layout;
  std::size_t pos = lay.require(label);
  const long df = lay.factor(pos).dim;
  if (k < 0 || k >= df) {
    throw SimError(Err::InvalidDimension, "basis index out of range for factor '" + label + "'");
  }
  const long stride = lay.stride(pos);
  const long outer = lay.dim() / (df * stride);

  SpaceLayout out_layout = lay.without(label);
  Vector out(out_layout.dim());
  long w = 0;
  for (long o = 0; o < outer; ++o) {
    const long base = (o * df + k) * stride;
    for (long i = 0; i < stride; ++i) out(w++) = v.amps(base + i);
  }
  return StateVector(std::move(out_layout), std::move(out));
}

StateVector insert_factor(const StateVector& v, std::size_t pos, const Factor& f, long k) {
  SpaceLayout out_layout = v.layout.inserted(pos, f);
  const long stride = out_layout.stride(pos);
  const long outer = v.layout.dim() / stride;
  Vector out = Vector::Zero(out_layout.dim());
  long r = 0;
  for (long o = 0; o < outer; ++o) {
    const long base = (o * f.dim + k) * stride;
    for (long i = 0; i < stride; ++i) out(base + i) = v.amps(r++);
  }
  return StateVector(std::move(out_layout), std::move(out));
}

double support_norm(const Operator& op, const std::string& label) {
  const auto& lay = op.layout;
  std::size_t pos = lay.require(label);
  const long df = lay.factor(pos).dim;

  // Trivial-on-the-factor part: (1/df) * 1_f (x) Tr_f(op), re-embedded.
  std::vector<std::string> rest;
  for (const auto& f : lay.factors()) {
    if (f.label != label) rest.push_back(f.label);
  }
  Operator traced = partial_trace(op, rest, /*general=*/true);
  Operator lifted = embed(traced, lay);
  return max_abs(op.mat - lifted.mat / static_cast<double>(df));
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) < tol;
}

double fidelity(const Vector& a, const Vector& b) {
  double na = a.squaredNorm(), nb = b.squaredNorm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::norm(a.dot(b)) / (na * nb);
}

double trace_distance(const Matrix& rho, const Matrix& sigma) {
  Matrix diff = rho - sigma;
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace chronoframe
