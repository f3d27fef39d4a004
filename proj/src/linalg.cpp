#include "srsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "srsim/errors.hpp"

namespace srsim::linalg {

namespace {

CMatrix symmetrize(const CMatrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("symmetrize: matrix must be square");
  }
  return 0.5 * (a + a.adjoint());
}

void require_finite(const CMatrix& a, const char* who) {
  if (!a.allFinite()) {
    throw Error(std::string(who) + ": non-finite entries");
  }
}

}  // namespace

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CVector vec(const CMatrix& a) {
  return Eigen::Map<const CVector>(a.data(), a.size());
}

double logdet_ipa(const CMatrix& a) {
  require_finite(a, "logdet_ipa");
  if (a.rows() == 0) {
    return 0.0;
  }
  const CMatrix s = symmetrize(a);
  CMatrix ipa = CMatrix::Identity(s.rows(), s.cols());
  ipa += s;
  Eigen::LDLT<CMatrix> ldlt(ipa);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double pivot = ldlt.vectorD()(i).real();
    if (pivot < 1e-12) {
      throw NonPsdError("logdet_ipa: pivot of I + A below 1e-12 (eigenvalue of A < -1)");
    }
    sum += std::log2(pivot);
  }
  return sum;
}

HermEig eigh(const CMatrix& a) {
  require_finite(a, "eigh");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(symmetrize(a));
  if (solver.info() != Eigen::Success) {
    throw NoConvergenceError("eigh: eigen-decomposition did not converge");
  }
  return HermEig{solver.eigenvalues(), solver.eigenvectors()};
}

Svd svd(const CMatrix& a) {
  require_finite(a, "svd");
  Eigen::JacobiSVD<CMatrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw NoConvergenceError("svd: decomposition did not converge");
  }
  return Svd{solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

RVector project_simplex(const RVector& v, double total) {
  const Eigen::Index n = v.size();
  if (n == 0) {
    throw DimensionError("project_simplex: empty vector");
  }
  RVector sorted = v;
  std::sort(sorted.data(), sorted.data() + n, std::greater<double>());
  // Threshold rule: tau from the largest k with mu_k - (sum_{i<=k} mu_i - total)/k > 0.
  double cumsum = 0.0;
  double tau = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumsum += sorted(k);
    const double t = (cumsum - total) / static_cast<double>(k + 1);
    if (sorted(k) - t > 0.0) {
      tau = t;
    }
  }
  return v.unaryExpr([tau](double x) { return std::max(x - tau, 0.0); });
}

CMatrix project_psd_trace1(const CMatrix& a) {
  const HermEig e = eigh(a);
  const RVector p = project_simplex(e.eigenvalues, 1.0);
  return e.eigenvectors * p.asDiagonal() * e.eigenvectors.adjoint();
}

CMatrix hermitian_sqrt(const CMatrix& a) {
  const HermEig e = eigh(a);
  RVector root = e.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return e.eigenvectors * root.asDiagonal() * e.eigenvectors.adjoint();
}

}  // namespace srsim::linalg
