#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "chronoframe/tensor.hpp"

using namespace chronoframe;

namespace {

std::mt19937_64 rng(0x5eed1234u);

Matrix random_matrix(long n) {
  std::normal_distribution<double> dist;
  Matrix m(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) m(i, j) = Complex(dist(rng), dist(rng));
  }
  return m;
}

Matrix random_hermitian(long n) {
  Matrix m = random_matrix(n);
  return 0.5 * (m + m.adjoint()).eval();
}

Operator qubit(const std::string& label, const Matrix& m) {
  return Operator(SpaceLayout({{label, 2}}), m, is_hermitian(m, 1e-12));
}

Matrix pauli_x_mat() {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

}  // namespace

TEST_CASE("layout basics and errors") {
  SpaceLayout lay({{"C", 4}, {"A", 2}, {"B", 3}});
  CHECK(lay.dim() == 24);
  CHECK(lay.stride(0) == 6);
  CHECK(lay.stride(2) == 1);
  CHECK(lay.require("B") == 2);
  CHECK_THROWS_AS(lay.require("nope"), SimError);
  CHECK_THROWS_AS(SpaceLayout({{"A", 2}, {"A", 2}}), SimError);
  CHECK(lay.without("A") == SpaceLayout({{"C", 4}, {"B", 3}}));

  SpaceLayout other({{"C", 4}, {"B", 3}, {"A", 2}});
  CHECK_FALSE(lay == other);  // order matters
}

TEST_CASE("kron identity case") {
  Operator i2 = identity(SpaceLayout({{"A", 2}}));
  Operator i2b = identity(SpaceLayout({{"B", 2}}));
  Operator out = kron(i2, i2b);
  CHECK(out.dim() == 4);
  CHECK(max_abs(out.mat - Matrix::Identity(4, 4)) == 0.0);
}

TEST_CASE("kron of two pauli x is the 4x4 anti-diagonal") {
  Operator out = kron(qubit("A", pauli_x_mat()), qubit("B", pauli_x_mat()));
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 3) = expected(1, 2) = expected(2, 1) = expected(3, 0) = 1.0;
  CHECK(max_abs(out.mat - expected) == 0.0);
}

TEST_CASE("kron matches the index-formula oracle") {
  Matrix a = random_matrix(2), b = random_matrix(3);
  Operator out = kron(Operator(SpaceLayout({{"A", 2}}), a),
                      Operator(SpaceLayout({{"B", 3}}), b));
  for (long i = 0; i < 6; ++i) {
    for (long j = 0; j < 6; ++j) {
      Complex expected = a(i / 3, j / 3) * b(i % 3, j % 3);
      CHECK(std::abs(out.mat(i, j) - expected) < 1e-14);
    }
  }
}

TEST_CASE("kron is associative") {
  Operator a(SpaceLayout({{"A", 2}}), random_matrix(2));
  Operator b(SpaceLayout({{"B", 3}}), random_matrix(3));
  Operator c(SpaceLayout({{"C", 2}}), random_matrix(2));
  Matrix left = kron(kron(a, b), c).mat;
  Matrix right = kron(a, kron(b, c)).mat;
  CHECK(max_abs(left - right) < 1e-14 * max_abs(left));
}

TEST_CASE("kron rejects duplicate labels") {
  Operator a = qubit("A", pauli_x_mat());
  CHECK_THROWS_AS(kron(a, a), SimError);
}

TEST_CASE("partial trace of a product state returns the kept factor") {
  Matrix rho_a = random_hermitian(2);
  rho_a = rho_a * rho_a.adjoint();  // PSD
  rho_a /= rho_a.trace().real();
  Matrix rho_b = random_hermitian(3);
  rho_b = rho_b * rho_b.adjoint();
  rho_b /= rho_b.trace().real();

  Operator rho = kron(Operator(SpaceLayout({{"A", 2}}), rho_a, true),
                      Operator(SpaceLayout({{"B", 3}}), rho_b, true));
  Operator reduced = partial_trace(rho, {"A"});
  CHECK(max_abs(reduced.mat - rho_a) < 1e-13);
  CHECK(reduced.layout == SpaceLayout({{"A", 2}}));
}

TEST_CASE("partial trace matches the brute-force index sum and keeps the trace") {
  Matrix m = random_matrix(4);
  Matrix rho = m * m.adjoint();
  rho /= rho.trace().real();
  Operator op(SpaceLayout({{"A", 2}, {"B", 2}}), rho, true);

  Operator reduced = partial_trace(op, {"B"});
  Matrix expected = Matrix::Zero(2, 2);
  for (long b = 0; b < 2; ++b) {
    for (long bp = 0; bp < 2; ++bp) {
      for (long a = 0; a < 2; ++a) {
        expected(b, bp) += rho(a * 2 + b, a * 2 + bp);
      }
    }
  }
  CHECK(max_abs(reduced.mat - expected) < 1e-13);
  CHECK(std::abs(reduced.mat.trace().real() - 1.0) < 1e-12);
}

TEST_CASE("partial trace rejects unknown labels and non-PSD input") {
  Matrix m = random_matrix(4);
  Matrix rho = m * m.adjoint();
  rho /= rho.trace().real();
  Operator op(SpaceLayout({{"A", 2}, {"B", 2}}), rho, true);
  CHECK_THROWS_AS(partial_trace(op, {"X"}), SimError);

  Operator general(SpaceLayout({{"A", 2}, {"B", 2}}), random_matrix(4));
  CHECK_THROWS_AS(partial_trace(general, {"A"}), SimError);
  CHECK_NOTHROW(partial_trace(general, {"A"}, /*general=*/true));
}

TEST_CASE("eigh on a diagonal matrix sorts ascending") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  d(2, 2) = 2.0;
  Eigh eig = eigh(Operator(SpaceLayout({{"S", 3}}), d, true));
  CHECK(eig.values(0) == doctest::Approx(1.0));
  CHECK(eig.values(1) == doctest::Approx(2.0));
  CHECK(eig.values(2) == doctest::Approx(3.0));
}

TEST_CASE("eigh of pauli x") {
  Eigh eig = eigh(qubit("A", pauli_x_mat()));
  CHECK(eig.values(0) == doctest::Approx(-1.0));
  CHECK(eig.values(1) == doctest::Approx(1.0));
}

TEST_CASE("eigh reconstruction residual on a random hermitian") {
  Matrix h = random_hermitian(8);
  Operator op(SpaceLayout({{"S", 8}}), h, true);
  Eigh eig = eigh(op);
  Matrix av = h * eig.vectors;
  Matrix vl = eig.vectors * eig.values.asDiagonal().toDenseMatrix().cast<Complex>();
  CHECK(max_abs(av - vl) < 1e-10 * max_abs(h));
  CHECK(max_abs(eig.vectors * eig.vectors.adjoint() - Matrix::Identity(8, 8)) < 1e-10);
}

TEST_CASE("eigh rejects non-hermitian input") {
  Operator op(SpaceLayout({{"S", 3}}), random_matrix(3));
  CHECK_THROWS_AS(eigh(op), SimError);
}

TEST_CASE("expm at t=0 is the identity") {
  Matrix h = random_hermitian(4);
  Operator u = expm_hermitian_generator(Operator(SpaceLayout({{"S", 4}}), h, true), 0.0);
  CHECK(max_abs(u.mat - Matrix::Identity(4, 4)) < 1e-14);
}

TEST_CASE("expm of the two-qubit coupling gives cos/sin weights") {
  Operator xx = kron(qubit("A", pauli_x_mat()), qubit("B", pauli_x_mat()));
  const double t = 0.7;
  Operator u = expm_hermitian_generator(xx, t);
  Matrix expected =
      std::cos(t) * Matrix::Identity(4, 4) - Complex(0, 1) * std::sin(t) * xx.mat;
  CHECK(max_abs(u.mat - expected) < 1e-12);
}

TEST_CASE("expm matches a 30-term taylor series") {
  Matrix h = random_hermitian(5);
  Matrix scaled = h / max_abs(h);  // keep |t| * ||H|| modest
  Operator op(SpaceLayout({{"S", 5}}), scaled, true);
  for (double t : {0.3, -0.9, 1.0}) {
    Matrix taylor = Matrix::Identity(5, 5);
    Matrix term = Matrix::Identity(5, 5);
    for (int n = 1; n <= 30; ++n) {
      term = term * (Complex(0, -t) * scaled) / static_cast<double>(n);
      taylor += term;
    }
    Operator u = expm_hermitian_generator(op, t);
    CHECK(max_abs(u.mat - taylor) < 1e-11);
    CHECK(max_abs(u.mat * u.mat.adjoint() - Matrix::Identity(5, 5)) < 1e-11);
  }
}

TEST_CASE("expm satisfies the group law") {
  Matrix h = random_hermitian(6);
  h /= max_abs(h);
  Operator op(SpaceLayout({{"S", 6}}), h, true);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    double s = dist(rng), t = dist(rng);
    Matrix lhs = expm_hermitian_generator(op, s).mat * expm_hermitian_generator(op, t).mat;
    Matrix rhs = expm_hermitian_generator(op, s + t).mat;
    CHECK(max_abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("embed places a qubit operator inside a larger layout") {
  SpaceLayout full({{"C", 3}, {"A", 2}, {"B", 2}});
  Operator x = qubit("A", pauli_x_mat());
  Operator lifted = embed(x, full);
  // Compare against kron(I3, X, I2).
  Operator expected = kron(kron(identity(SpaceLayout({{"C", 3}})), x),
                           identity(SpaceLayout({{"B", 2}})));
  CHECK(max_abs(lifted.mat - expected.mat) == 0.0);
}

TEST_CASE("contract and insert factor round-trip") {
  SpaceLayout lay({{"C", 3}, {"S", 2}});
  Vector amps(6);
  for (long i = 0; i < 6; ++i) amps(i) = Complex(i, -i);
  StateVector v(lay, amps);

  StateVector sliced = contract_factor(v, "C", 1);
  CHECK(sliced.layout == SpaceLayout({{"S", 2}}));
  CHECK(sliced.amps(0) == Complex(2, -2));
  CHECK(sliced.amps(1) == Complex(3, -3));

  StateVector lifted = insert_factor(sliced, 0, {"C", 3}, 1);
  CHECK(lifted.layout == lay);
  CHECK(lifted.amps(2) == Complex(2, -2));
  CHECK(lifted.amps(0) == Complex(0, 0));
}

TEST_CASE("support_norm flags the factors an operator acts on") {
  SpaceLayout full({{"C", 3}, {"A", 2}, {"B", 2}});
  Operator x_a = embed(qubit("A", pauli_x_mat()), full);
  CHECK(support_norm(x_a, "A") > 0.5);
  CHECK(support_norm(x_a, "B") < 1e-14);
  CHECK(support_norm(x_a, "C") < 1e-14);
}
