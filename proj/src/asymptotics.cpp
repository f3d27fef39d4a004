#include "srsim/asymptotics.hpp"

#include <cmath>

#include "srsim/errors.hpp"

namespace srsim {

namespace {

RVector mmse_of(const RVector& p, const RVector& gains, double p_bar, int m_t) {
  const double scale = p_bar / static_cast<double>(m_t);
  return (1.0 + (scale * p.array() * gains.array())).inverse().matrix();
}

}  // namespace

double bd_sumrate_asym(const CMatrix& q, const AsymParams& ap) {
  const double c = static_cast<double>(ap.j_bds) * static_cast<double>(ap.k_spread) *
                   ap.p_bar * ap.alpha * ap.beta_h * ap.beta_g;
  return static_cast<double>(ap.m_r) / static_cast<double>(ap.k_spread) *
         linalg::logdet_ipa(c * q);
}

PowerAllocation waterfilling_fixed_point(const RVector& eigs, double p_bar, int m_t,
                                         double uplift, double damping, double tol,
                                         int max_iter) {
  const Eigen::Index m_s = eigs.size();
  if (m_s == 0) {
    throw DimensionError("waterfilling_fixed_point: empty eigenvalue vector");
  }
  if (eigs.minCoeff() < 0.0 || uplift < 0.0) {
    throw Error("waterfilling_fixed_point: eigenvalues and uplift must be >= 0");
  }
  const RVector gains = eigs.array() + uplift;

  PowerAllocation out;
  out.p = RVector::Ones(m_s);
  if (gains.maxCoeff() <= 0.0) {
    // All-zero channel: the equations are 0/0; the uniform point is returned.
    out.mmse = RVector::Ones(m_s);
    return out;
  }

  for (int it = 0; it < max_iter; ++it) {
    const RVector mmse = mmse_of(out.p, gains, p_bar, m_t);
    const RVector reduced = (1.0 - mmse.array()).matrix();
    const double denom = reduced.sum() / static_cast<double>(m_s);
    const RVector next = reduced / denom;
    const double residual = (out.p - next).lpNorm<Eigen::Infinity>();
    if (residual <= tol) {
      // The returned allocation itself satisfies the fixed-point equations
      // within tol, so report the MMSE values at this point.
      out.mmse = mmse;
      out.iterations = it + 1;
      return out;
    }
    out.p = (1.0 - damping) * out.p + damping * next;
  }
  throw NoConvergenceError("waterfilling_fixed_point: residual above tolerance at iteration cap");
}

double lemma3_rate(const CMatrix& q, const CMatrix& h_d, const AsymParams& ap) {
  CMatrix r = h_d.adjoint() * h_d;
  r += ap.uplift() * CMatrix::Identity(ap.m_t, ap.m_t);
  const CMatrix root = linalg::hermitian_sqrt(r);
  return linalg::logdet_ipa(ap.p_bar * root * q * root);
}

AsymPrimary primary_rate_asym(const CMatrix& h_d, const AsymParams& ap) {
  if (h_d.rows() != ap.m_r || h_d.cols() != ap.m_t) {
    throw DimensionError("primary_rate_asym: H_d must be M_r x M_t");
  }
  const linalg::HermEig e = linalg::eigh(h_d.adjoint() * h_d);
  const RVector eigs = e.eigenvalues.cwiseMax(0.0);
  const double uplift = ap.uplift();

  AsymPrimary out;
  out.alloc = waterfilling_fixed_point(eigs, ap.p_bar, ap.m_t, uplift);
  const double scale = ap.p_bar / static_cast<double>(ap.m_t);
  double rate = 0.0;
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    rate += std::log2(1.0 + scale * out.alloc.p(i) * (eigs(i) + uplift));
  }
  out.rate_bits = rate;
  out.f = (1.0 / std::sqrt(static_cast<double>(ap.m_t))) * e.eigenvectors *
          out.alloc.p.cwiseSqrt().asDiagonal();
  return out;
}

SimoRates simo_asym(const AsymParams& ap, double h_d_norm2) {
  if (ap.m_t != 1) {
    throw WrongModeError("simo_asym: requires M_t = 1");
  }
  const double jk = static_cast<double>(ap.j_bds) * static_cast<double>(ap.k_spread);
  SimoRates out;
  out.r_bd = static_cast<double>(ap.m_r) / static_cast<double>(ap.k_spread) *
             std::log2(1.0 + jk * ap.p_bar * ap.alpha * ap.beta_h * ap.beta_g);
  out.r_s = std::log2(1.0 + ap.p_bar * (h_d_norm2 + ap.uplift()));
  return out;
}

double rs_of_rbd(double r_bd_asym, double p_bar, double h_d_norm2, int m_r, int k_spread) {
  if (r_bd_asym < 0.0) {
    throw Error("rs_of_rbd: r_bd must be >= 0");
  }
  const double ratio = static_cast<double>(m_r) / static_cast<double>(k_spread);
  return std::log2(1.0 + p_bar * h_d_norm2 +
                   ratio * (std::exp2(r_bd_asym / ratio) - 1.0));
}

}  // namespace srsim
