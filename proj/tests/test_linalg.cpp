#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "srsim/errors.hpp"
#include "srsim/linalg.hpp"
#include "test_support.hpp"

using namespace srsim;
using namespace srsim::testing;
using namespace srsim::linalg;

namespace {

// Independent simplex-projection oracle: bisection on the threshold tau in
// sum_i max(v_i - tau, 0) = total.
RVector simplex_oracle(const RVector& v, double total) {
  double lo = v.minCoeff() - total - 1.0;
  double hi = v.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double tau = 0.5 * (lo + hi);
    const double mass = v.unaryExpr([tau](double x) { return std::max(x - tau, 0.0); }).sum();
    (mass > total ? lo : hi) = tau;
  }
  const double tau = 0.5 * (lo + hi);
  return v.unaryExpr([tau](double x) { return std::max(x - tau, 0.0); });
}

}  // namespace

TEST_CASE("kron identity and scalar cases") {
  const CMatrix i2 = CMatrix::Identity(2, 2);
  CHECK((kron(i2, i2) - CMatrix::Identity(4, 4)).norm() == doctest::Approx(0.0));

  Rng rng(11);
  const CMatrix b = random_cmatrix(rng, 3, 2);
  CMatrix two(1, 1);
  two(0, 0) = 2.0;
  CHECK((kron(two, b) - 2.0 * b).norm() == doctest::Approx(0.0));
}

TEST_CASE("kron mixed-product identity") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = random_cmatrix(rng, 2, 2);
    const CMatrix b = random_cmatrix(rng, 2, 2);
    const CMatrix c = random_cmatrix(rng, 2, 2);
    const CMatrix d = random_cmatrix(rng, 2, 2);
    const CMatrix lhs = kron(a, b) * kron(c, d);
    const CMatrix rhs = kron(CMatrix(a * c), CMatrix(b * d));
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("kron adjoint identity") {
  Rng rng(13);
  const CMatrix a = random_cmatrix(rng, 3, 2);
  const CMatrix b = random_cmatrix(rng, 2, 4);
  CHECK((kron(a, b).adjoint() - kron(CMatrix(a.adjoint()), CMatrix(b.adjoint()))).norm() <=
        1e-10);
}

TEST_CASE("vec basics and product identity") {
  const CMatrix i2 = CMatrix::Identity(2, 2);
  const CVector v = vec(i2);
  CHECK(v.size() == 4);
  CHECK(std::abs(v(0) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(v(1)) < 1e-15);
  CHECK(std::abs(v(2)) < 1e-15);
  CHECK(std::abs(v(3) - Complex(1, 0)) < 1e-15);

  CMatrix s(1, 1);
  s(0, 0) = Complex(2.5, -1.0);
  CHECK(std::abs(vec(s)(0) - s(0, 0)) < 1e-15);

  // vec(A1 A2 A3) = (A3^T kron A1) vec(A2)
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix a1 = random_cmatrix(rng, 2, 3);
    const CMatrix a2 = random_cmatrix(rng, 3, 2);
    const CMatrix a3 = random_cmatrix(rng, 2, 2);
    const CVector lhs = vec(a1 * a2 * a3);
    const CVector rhs = kron(CMatrix(a3.transpose()), a1) * vec(a2);
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("logdet_ipa trivial cases") {
  CHECK(logdet_ipa(CMatrix::Zero(3, 3)) == doctest::Approx(0.0));
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  CHECK(logdet_ipa(d) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("logdet_ipa matches eigenvalue oracle") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = random_psd(rng, 5, 2.0);
    double oracle = 0.0;
    const HermEig e = eigh(a);
    for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i) {
      oracle += std::log2(1.0 + std::max(e.eigenvalues(i), 0.0));
    }
    CHECK(std::abs(logdet_ipa(a) - oracle) <= 1e-10 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("logdet_ipa survives huge scales without overflow") {
  Rng rng(16);
  const CMatrix a = random_psd(rng, 8, 1.0) * 1e12;
  const double v = logdet_ipa(a);
  CHECK(std::isfinite(v));

  const HermEig e = eigh(a);
  double oracle = 0.0;
  for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i) {
    oracle += std::log2(1.0 + std::max(e.eigenvalues(i), 0.0));
  }
  CHECK(rel_err(v, oracle) < 1e-12);
}

TEST_CASE("logdet_ipa rejects matrices with eigenvalues below -1") {
  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 0) = -2.0;
  CHECK_THROWS_AS((void)logdet_ipa(bad), NonPsdError);
}

TEST_CASE("eigh identity and reconstruction invariants") {
  const HermEig id = eigh(CMatrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(id.eigenvalues(i) == doctest::Approx(1.0));

  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix a = random_hermitian(rng, 6, 3.0);
    const HermEig e = eigh(a);
    for (Eigen::Index i = 1; i < e.eigenvalues.size(); ++i) {
      CHECK(e.eigenvalues(i) >= e.eigenvalues(i - 1));
    }
    const CMatrix rec = e.eigenvectors * e.eigenvalues.cast<Complex>().asDiagonal() *
                        e.eigenvectors.adjoint();
    CHECK((rec - a).norm() <= 1e-10 * std::max(1.0, a.norm()));
    CHECK((e.eigenvectors.adjoint() * e.eigenvectors - CMatrix::Identity(6, 6)).norm() <= 1e-10);
  }
}

TEST_CASE("svd rank-1 case and Gram oracle") {
  Rng rng(18);
  const CVector a = random_cvector(rng, 4);
  const CVector b = random_cvector(rng, 3);
  const Svd s1 = svd(a * b.adjoint());
  CHECK(s1.sigma(0) == doctest::Approx(a.norm() * b.norm()).epsilon(1e-12));
  for (Eigen::Index i = 1; i < s1.sigma.size(); ++i) {
    CHECK(s1.sigma(i) <= 1e-12 * s1.sigma(0));
  }

  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix m = random_cmatrix(rng, 4, 6);
    const Svd s = svd(m);
    for (Eigen::Index i = 1; i < s.sigma.size(); ++i) {
      CHECK(s.sigma(i) <= s.sigma(i - 1));
      CHECK(s.sigma(i) >= 0.0);
    }
    const CMatrix rec = s.u * s.sigma.cast<Complex>().asDiagonal() * s.v.adjoint();
    CHECK((rec - m).norm() <= 1e-10 * std::max(1.0, m.norm()));
    // Gram eigenvalues equal sigma^2 (independent route)
    const HermEig gram = eigh(m * m.adjoint());
    RVector sig2 = s.sigma.cwiseProduct(s.sigma);
    std::sort(sig2.data(), sig2.data() + sig2.size());
    for (Eigen::Index i = 0; i < sig2.size(); ++i) {
      CHECK(std::abs(gram.eigenvalues(i) - sig2(i)) <= 1e-9 * std::max(1.0, sig2.maxCoeff()));
    }
  }
}

TEST_CASE("Weinstein-Aronszajn and transpose determinant identities") {
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = random_cmatrix(rng, 3, 2);
    const CMatrix b = random_cmatrix(rng, 2, 3);
    const Complex lhs = (CMatrix::Identity(3, 3) + a * b).determinant();
    const Complex rhs = (CMatrix::Identity(2, 2) + b * a).determinant();
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));

    const CMatrix m = random_cmatrix(rng, 3, 3);
    CHECK(std::abs(m.determinant() - m.transpose().determinant()) <=
          1e-10 * std::max(1.0, std::abs(m.determinant())));
  }
}

TEST_CASE("project_psd_trace1 fixed points and rescale case") {
  Rng rng(20);
  CMatrix q = random_psd_trace1(rng, 4);
  CHECK((project_psd_trace1(q) - q).norm() <= 1e-12);

  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  const CMatrix p = project_psd_trace1(d);
  CHECK(std::abs(p(0, 0) - Complex(1, 0)) <= 1e-12);
  CHECK(std::abs(p(1, 1)) <= 1e-12);
}

TEST_CASE("project_psd_trace1 threshold case") {
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 0.9;
  d(1, 1) = 0.9;
  d(2, 2) = -0.3;
  const CMatrix p = project_psd_trace1(d);
  CHECK(std::abs(p(0, 0) - Complex(0.5, 0)) <= 1e-12);
  CHECK(std::abs(p(1, 1) - Complex(0.5, 0)) <= 1e-12);
  CHECK(std::abs(p(2, 2)) <= 1e-12);
}

TEST_CASE("project_simplex matches bisection oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    RVector v(5);
    for (int i = 0; i < 5; ++i) v(i) = 4.0 * (rng.uniform01() - 0.3);
    const RVector mine = project_simplex(v, 1.0);
    const RVector oracle = simplex_oracle(v, 1.0);
    CHECK((mine - oracle).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(std::abs(mine.sum() - 1.0) <= 1e-12);
    CHECK(mine.minCoeff() >= 0.0);
  }
}

TEST_CASE("project_psd_trace1 invariants on random Hermitian inputs") {
  Rng rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const CMatrix a = random_hermitian(rng, 5, 2.0);
    const CMatrix p = project_psd_trace1(a);
    const HermEig e = eigh(p);
    CHECK(e.eigenvalues.minCoeff() >= -1e-12);
    CHECK(std::abs(p.trace().real() - 1.0) <= 1e-12);
    CHECK((p - p.adjoint()).norm() <= 1e-12);
  }
}

TEST_CASE("hermitian_sqrt squares back") {
  Rng rng(23);
  const CMatrix a = random_psd(rng, 4, 1.5);
  const CMatrix r = hermitian_sqrt(a);
  CHECK((r * r - a).norm() <= 1e-10 * std::max(1.0, a.norm()));
}
