#pragma once

#include <Eigen/Dense>
#include <complex>

namespace srsim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

namespace linalg {

// Relative cutoff for reduced decompositions: keep sigma_i > kRankTol * max.
inline constexpr double kRankTol = 1e-10;

struct HermEig {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // unitary; column i pairs with eigenvalues[i]
};

struct Svd {
  CMatrix u;      // reduced left singular vectors
  RVector sigma;  // descending, >= 0
  CMatrix v;      // reduced right singular vectors; a = u * diag(sigma) * v^H
};

CMatrix kron(const CMatrix& a, const CMatrix& b);

// Column-stacking of a into a vector.
CVector vec(const CMatrix& a);

// log2|I + A| for Hermitian PSD A, evaluated as a sum of log pivots so the
// determinant itself (which can exceed double range) is never formed.
// A is symmetrized as (A + A^H)/2 first. Throws NonPsdError when a pivot of
// I + A falls below 1e-12, i.e. an eigenvalue of A below -1 + 1e-12.
double logdet_ipa(const CMatrix& a);

HermEig eigh(const CMatrix& a);
Svd svd(const CMatrix& a);

// Euclidean projection of v onto the simplex {p >= 0, sum p = total}.
RVector project_simplex(const RVector& v, double total = 1.0);

// Frobenius-nearest Hermitian PSD matrix with unit trace: eigendecompose the
// symmetrized input and project the eigenvalue vector onto the simplex.
CMatrix project_psd_trace1(const CMatrix& a);

// PSD square root via eigh; eigenvalues clamped at zero.
CMatrix hermitian_sqrt(const CMatrix& a);

}  // namespace linalg
}  // namespace srsim
