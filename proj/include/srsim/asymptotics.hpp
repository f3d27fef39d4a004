#pragma once

#include "srsim/linalg.hpp"

namespace srsim {

// Inputs of the large-J closed forms. beta_h, beta_g are the common
// large-scale gains of the i.i.d. BD channels (E[h h^H] = beta_h I,
// E[g g^H] = beta_g I).
struct AsymParams {
  int j_bds = 0;
  int k_spread = 128;
  int m_t = 4;
  int m_r = 8;
  double p_bar = 1.0;
  double alpha = 1.0;
  double beta_h = 1.0;
  double beta_g = 1.0;
  double beta_hd = 0.0;

  double uplift() const {
    return static_cast<double>(j_bds) * alpha * static_cast<double>(m_r) * beta_g * beta_h;
  }
};

// Normalized per-stream powers: p sums to M_s, each p_i >= 0.
struct PowerAllocation {
  RVector p;
  RVector mmse;
  int iterations = 0;
};

struct AsymPrimary {
  double rate_bits = 0.0;
  PowerAllocation alloc;
  CMatrix f;  // M_t x M_t optimal precoder, tr(F F^H) = 1
};

struct SimoRates {
  double r_bd = 0.0;
  double r_s = 0.0;
};

// Large-J BD sum capacity (M_r/K) log2| I + J K Pbar alpha beta_h beta_g Q |.
double bd_sumrate_asym(const CMatrix& q, const AsymParams& ap);

// Fixed point of the normalized MMSE waterfilling equations
//   p_i = (1 - MMSE_i(p_i)) / ((1/M_s) sum_q (1 - MMSE_q(p_q))),
//   MMSE_i(p) = 1 / (1 + (Pbar/M_t) p (eig_i + uplift)),
// solved by damped iteration from the uniform start. Throws NoConvergenceError
// when the residual is still above tol after max_iter steps.
PowerAllocation waterfilling_fixed_point(const RVector& eigs, double p_bar, int m_t,
                                         double uplift, double damping = 0.5,
                                         double tol = 1e-8, int max_iter = 10000);

// Large-J primary rate for a fixed covariance Q:
// log2| I + Pbar R^(1/2) Q R^(1/2) | with R = H_d^H H_d + uplift I.
double lemma3_rate(const CMatrix& q, const CMatrix& h_d, const AsymParams& ap);

// Optimal large-J precoder: waterfilling over the eigenvalues of H_d^H H_d
// shifted by the BD uplift, F = (1/sqrt(M_t)) V P^(1/2), and the resulting
// rate sum_i log2(1 + (Pbar/M_t) p_i (lambda_i + uplift)).
AsymPrimary primary_rate_asym(const CMatrix& h_d, const AsymParams& ap);

// SIMO (M_t = 1) closed forms; throws WrongModeError when ap.m_t != 1.
SimoRates simo_asym(const AsymParams& ap, double h_d_norm2);

// r_s as a function of the asymptotic BD sum rate:
// log2(1 + Pbar ||h_d||^2 + (M_r/K)(2^{(K/M_r) r_bd} - 1)).
double rs_of_rbd(double r_bd_asym, double p_bar, double h_d_norm2, int m_r, int k_spread);

}  // namespace srsim
