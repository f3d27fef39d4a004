#pragma once

#include <vector>

#include "srsim/rates.hpp"

namespace srsim {

enum class SolveMode { kSampleAverage, kUpperBound };

struct SolveOptions {
  SolveMode mode = SolveMode::kUpperBound;
  double r_bd_bits = 0.0;      // BD sum-rate threshold
  int sample_count = 1000;     // frozen BD symbol draws (sample-average mode)
  double grad_tol = 1e-6;      // projected-gradient norm at convergence
  double slack_tol_bits = 1e-4;
  double mu_max = 1e6;
  int max_outer = 60;          // bisection steps on the multiplier
  int max_inner = 5000;        // gradient steps per inner solve
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int threads = 1;

  void validate() const;
};

struct SolveDiagnostics {
  double objective_bits = 0.0;
  double constraint_bits = 0.0;
  double mu = 0.0;
  int iterations = 0;  // total inner gradient steps
  bool converged = false;
  double wall_time_s = 0.0;
};

struct SolveResult {
  CMatrix q;
  SolveDiagnostics diag;
};

struct PrecoderFactor {
  CMatrix f;
  int m_s = 0;
};

// BD sum-rate constraint g(Q); delegates to bd_sumrate_kron.
double constraint_rate(const CMatrix& q, const ChannelSet& ch, const SystemParams& params);

// Analytic gradient of g(Q): with c = K Pbar alpha and M = c Psi^H (Q kron G^T) Psi,
// grad = (c / (K ln 2)) sum_{j,l} [(I+M)^-1]_{lj} (g_j^H g_l) h_j h_l^H,
// Hermitian-symmetrized.
CMatrix constraint_gradient(const CMatrix& q, const ChannelSet& ch, const SystemParams& params);

// R = H_d^H H_d + alpha sum_j ||g_j||^2 h_j h_j^H (the expected Gram of the
// equivalent channel over zero-mean unit-power BD symbols).
CMatrix expected_equivalent_gram(const ChannelSet& ch, const SystemParams& params);

// Jensen upper bound log2|I + Pbar R^(1/2) Q R^(1/2)| and its gradient
// (Pbar/ln2) R^(1/2) (I + Pbar R^(1/2) Q R^(1/2))^-1 R^(1/2).
double objective_upper_bound(const CMatrix& q, const ChannelSet& ch, const SystemParams& params);
CMatrix objective_upper_bound_gradient(const CMatrix& q, const ChannelSet& ch,
                                       const SystemParams& params);

// Sample average (1/S) sum_s log2|I + Pbar H_eq(c_s) Q H_eq(c_s)^H| over a
// frozen sample set, and its gradient.
double objective_sample_average(const CMatrix& q, const ChannelSet& ch,
                                const SystemParams& params, const std::vector<CVector>& samples);
CMatrix objective_sample_average_gradient(const CMatrix& q, const ChannelSet& ch,
                                          const SystemParams& params,
                                          const std::vector<CVector>& samples);

// Maximize the primary-rate objective subject to g(Q) >= r_bd, tr Q = 1,
// Q PSD. Outer bisection on the Lagrange multiplier of the BD constraint,
// inner projected gradient ascent with Armijo backtracking. The sample set of
// the sample-average objective is drawn once from rng and frozen for the whole
// solve. Throws InfeasibleError when even max_Q g(Q) < r_bd - slack_tol, and
// NoConvergenceError when the bisection cannot pin the threshold.
SolveResult solve_precoding(const ChannelSet& ch, const SystemParams& params,
                            const SolveOptions& opts, const Rng& rng);

// Reduced eigendecomposition Q = U S U^H; F = U S^(1/2) over eigenvalues
// above tol * lambda_max, M_s = retained count.
PrecoderFactor covariance_to_precoder(const CMatrix& q, double tol = 1e-8);

// Benchmark precoder matched to the direct link only: right singular vectors
// of H_d with classical waterfilling over its squared singular values at SNR
// p_bar. tr(F F^H) = 1.
CMatrix direct_link_matching(const CMatrix& h_d, double p_bar, int m_t);

// max sum_i log2(1 + gains_i q_i) s.t. sum q = 1, q >= 0 (exact waterfilling).
RVector waterfill_simplex(const RVector& gains);

}  // namespace srsim
