#include "srsim/precoder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>

#include "srsim/errors.hpp"
#include "srsim/threading.hpp"

namespace srsim {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr std::uint64_t kTagFrozenSamples = 0x5a;

// ---------------------------------------------------------------------------
// Cached evaluators. Everything that depends on the channel only is built
// once per solve; per-iteration work touches small dense matrices.

struct ConstraintEval {
  CMatrix hmat;    // M_t x J
  CMatrix gram_g;  // J x J, (j,l) = g_j^H g_l
  double c = 0.0;  // K Pbar alpha
  int k_spread = 1;
  int j_bds = 0;

  ConstraintEval(const ChannelSet& ch, const SystemParams& params) {
    j_bds = static_cast<int>(ch.h.size());
    k_spread = params.k_spread;
    c = static_cast<double>(params.k_spread) * params.p_bar() * params.alpha;
    hmat.resize(params.m_t, j_bds);
    CMatrix gmat(params.m_r, j_bds);
    for (int j = 0; j < j_bds; ++j) {
      hmat.col(j) = ch.h[static_cast<std::size_t>(j)];
      gmat.col(j) = ch.g[static_cast<std::size_t>(j)];
    }
    gram_g = gmat.adjoint() * gmat;
  }

  CMatrix inner_matrix(const CMatrix& q) const {
    const CMatrix hqh = hmat.adjoint() * q * hmat;  // (l, j) = h_l^H Q h_j
    return c * gram_g.cwiseProduct(hqh.transpose());
  }

  double value(const CMatrix& q) const {
    if (j_bds == 0) return 0.0;
    return linalg::logdet_ipa(inner_matrix(q)) / static_cast<double>(k_spread);
  }

  CMatrix grad(const CMatrix& q) const {
    if (j_bds == 0) return CMatrix::Zero(q.rows(), q.cols());
    CMatrix ipm = inner_matrix(q);
    ipm = 0.5 * (ipm + ipm.adjoint());
    ipm += CMatrix::Identity(j_bds, j_bds);
    const CMatrix inv = ipm.ldlt().solve(CMatrix::Identity(j_bds, j_bds));
    const CMatrix coeff = inv.transpose().cwiseProduct(gram_g);
    CMatrix grad = (c / (static_cast<double>(k_spread) * kLn2)) * hmat * coeff * hmat.adjoint();
    return 0.5 * (grad + grad.adjoint());
  }
};

struct UpperBoundEval {
  CMatrix r_sqrt;
  double p_bar = 0.0;
  Eigen::Index m_t = 0;

  UpperBoundEval(const ChannelSet& ch, const SystemParams& params) {
    r_sqrt = linalg::hermitian_sqrt(expected_equivalent_gram(ch, params));
    p_bar = params.p_bar();
    m_t = r_sqrt.rows();
  }

  double value(const CMatrix& q) const {
    return linalg::logdet_ipa(p_bar * r_sqrt * q * r_sqrt);
  }

  CMatrix grad(const CMatrix& q) const {
    CMatrix ipm = CMatrix::Identity(m_t, m_t);
    ipm += p_bar * r_sqrt * q * r_sqrt;
    ipm = 0.5 * (ipm + ipm.adjoint());
    const CMatrix inv = ipm.ldlt().solve(CMatrix::Identity(m_t, m_t));
    CMatrix grad = (p_bar / kLn2) * r_sqrt * inv * r_sqrt;
    return 0.5 * (grad + grad.adjoint());
  }
};

struct SampleAverageEval {
  std::vector<CMatrix> h_s;  // equivalent channel per frozen sample
  double p_bar = 0.0;
  int threads = 1;

  SampleAverageEval(const ChannelSet& ch, const SystemParams& params,
                    const std::vector<CVector>& samples, int threads_in) {
    p_bar = params.p_bar();
    threads = threads_in;
    h_s.reserve(samples.size());
    for (const CVector& c : samples) {
      h_s.push_back(equivalent_channel(ch, c, params.alpha));
    }
  }

  double value(const CMatrix& q) const {
    const int s = static_cast<int>(h_s.size());
    const std::vector<double> vals = parallel_map<double>(s, threads, [&](int i) {
      const CMatrix& h = h_s[static_cast<std::size_t>(i)];
      return linalg::logdet_ipa(p_bar * h * q * h.adjoint());
    });
    double sum = 0.0;
    for (double v : vals) sum += v;
    return sum / static_cast<double>(s);
  }

  CMatrix grad(const CMatrix& q) const {
    const int s = static_cast<int>(h_s.size());
    const Eigen::Index m_t = q.rows();
    const std::vector<CMatrix> grads = parallel_map<CMatrix>(s, threads, [&](int i) {
      const CMatrix& h = h_s[static_cast<std::size_t>(i)];
      const Eigen::Index m_r = h.rows();
      CMatrix ipm = CMatrix::Identity(m_r, m_r);
      ipm += p_bar * h * q * h.adjoint();
      ipm = 0.5 * (ipm + ipm.adjoint());
      const CMatrix solved = ipm.ldlt().solve(h);  // (I + Pbar H Q H^H)^-1 H
      return CMatrix(h.adjoint() * solved);
    });
    CMatrix grad = CMatrix::Zero(m_t, m_t);
    for (const CMatrix& g : grads) grad += g;
    grad *= p_bar / (kLn2 * static_cast<double>(s));
    return 0.5 * (grad + grad.adjoint());
  }
};

// ---------------------------------------------------------------------------
// Inner solver: projected gradient ascent over {Q PSD, tr Q = 1}.

struct SmoothFn {
  std::function<double(const CMatrix&)> value;
  std::function<CMatrix(const CMatrix&)> grad;
};

struct InnerResult {
  CMatrix q;
  double value = 0.0;
  double pg_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

double inner_product(const CMatrix& a, const CMatrix& b) {
  return std::real((a.adjoint() * b).trace());
}

double pg_residual(const CMatrix& q, const CMatrix& grad) {
  return (linalg::project_psd_trace1(q + grad) - q).norm();
}

InnerResult maximize_on_spectraplex(const SmoothFn& fn, const CMatrix& q_start,
                                    const SolveOptions& opts) {
  InnerResult res;
  res.q = linalg::project_psd_trace1(q_start);
  const Eigen::Index m_t = res.q.rows();

  // Step initialization 1/L, L estimated from the gradient at the uniform point.
  const CMatrix uniform = CMatrix::Identity(m_t, m_t) / static_cast<double>(m_t);
  const double l_est = fn.grad(uniform).norm();
  double step = 1.0 / std::max(l_est, 1e-12);

  double value = fn.value(res.q);
  for (int it = 0; it < opts.max_inner; ++it) {
    const CMatrix grad = fn.grad(res.q);
    res.pg_residual = pg_residual(res.q, grad);
    if (res.pg_residual <= opts.grad_tol) {
      res.converged = true;
      res.value = value;
      res.iterations = it;
      return res;
    }
    bool accepted = false;
    bool first_try = true;
    while (step > 1e-18) {
      const CMatrix trial = linalg::project_psd_trace1(res.q + step * grad);
      const double ascent = inner_product(grad, trial - res.q);
      const double trial_value = fn.value(trial);
      if (trial_value >= value + opts.armijo_c * ascent) {
        res.q = trial;
        value = trial_value;
        accepted = true;
        break;
      }
      step *= opts.backtrack;
      first_try = false;
    }
    if (!accepted) {
      break;  // step underflow: no ascent direction left at this scale
    }
    if (first_try) {
      step = std::min(step * 2.0, 1e12);
    }
  }
  const CMatrix grad = fn.grad(res.q);
  res.pg_residual = pg_residual(res.q, grad);
  res.converged = res.pg_residual <= opts.grad_tol;
  res.value = fn.value(res.q);
  res.iterations = opts.max_inner;
  return res;
}

}  // namespace

void SolveOptions::validate() const {
  if (sample_count < 1) throw ConfigError("solver: S must be >= 1");
  if (grad_tol <= 0 || slack_tol_bits <= 0) throw ConfigError("solver: tolerances must be > 0");
  if (mu_max <= 0) throw ConfigError("solver: mu_max must be > 0");
  if (max_outer < 1 || max_inner < 1) throw ConfigError("solver: iteration caps must be >= 1");
  if (armijo_c <= 0 || armijo_c >= 1) throw ConfigError("solver: armijo_c must be in (0, 1)");
  if (backtrack <= 0 || backtrack >= 1) throw ConfigError("solver: backtrack must be in (0, 1)");
}

double constraint_rate(const CMatrix& q, const ChannelSet& ch, const SystemParams& params) {
  return bd_sumrate_kron(q, ch, params);
}

CMatrix constraint_gradient(const CMatrix& q, const ChannelSet& ch, const SystemParams& params) {
  if (q.rows() != params.m_t || q.cols() != params.m_t) {
    throw DimensionError("constraint_gradient: Q must be M_t x M_t");
  }
  return ConstraintEval(ch, params).grad(q);
}

CMatrix expected_equivalent_gram(const ChannelSet& ch, const SystemParams& params) {
  CMatrix r = ch.h_d.adjoint() * ch.h_d;
  for (std::size_t j = 0; j < ch.h.size(); ++j) {
    r.noalias() += (params.alpha * ch.g[j].squaredNorm()) * ch.h[j] * ch.h[j].adjoint();
  }
  return 0.5 * (r + r.adjoint());
}

double objective_upper_bound(const CMatrix& q, const ChannelSet& ch,
                             const SystemParams& params) {
  return UpperBoundEval(ch, params).value(q);
}

CMatrix objective_upper_bound_gradient(const CMatrix& q, const ChannelSet& ch,
                                       const SystemParams& params) {
  return UpperBoundEval(ch, params).grad(q);
}

double objective_sample_average(const CMatrix& q, const ChannelSet& ch,
                                const SystemParams& params,
                                const std::vector<CVector>& samples) {
  if (samples.empty()) throw ConfigError("objective_sample_average: S must be >= 1");
  return SampleAverageEval(ch, params, samples, 1).value(q);
}

CMatrix objective_sample_average_gradient(const CMatrix& q, const ChannelSet& ch,
                                          const SystemParams& params,
                                          const std::vector<CVector>& samples) {
  if (samples.empty()) throw ConfigError("objective_sample_average_gradient: S must be >= 1");
  return SampleAverageEval(ch, params, samples, 1).grad(q);
}

SolveResult solve_precoding(const ChannelSet& ch, const SystemParams& params,
                            const SolveOptions& opts, const Rng& rng) {
  opts.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const Eigen::Index m_t = params.m_t;
  const CMatrix uniform = CMatrix::Identity(m_t, m_t) / static_cast<double>(m_t);

  // Frozen sample set: drawn once, shared by every inner solve so the
  // bisection optimizes one fixed deterministic function.
  std::vector<CVector> samples;
  std::unique_ptr<SampleAverageEval> sa;
  std::unique_ptr<UpperBoundEval> ub;
  if (opts.mode == SolveMode::kSampleAverage) {
    BDSymbolSource source(params.constellation, rng.substream(kTagFrozenSamples));
    samples.reserve(static_cast<std::size_t>(opts.sample_count));
    for (int s = 0; s < opts.sample_count; ++s) {
      BDSymbolSource draw = source.substream(static_cast<std::uint64_t>(s));
      samples.push_back(draw.draw(params.j_bds));
    }
    sa = std::make_unique<SampleAverageEval>(ch, params, samples, opts.threads);
  } else {
    ub = std::make_unique<UpperBoundEval>(ch, params);
  }

  const ConstraintEval g_eval(ch, params);
  SmoothFn f;
  if (sa) {
    f.value = [&](const CMatrix& q) { return sa->value(q); };
    f.grad = [&](const CMatrix& q) { return sa->grad(q); };
  } else {
    f.value = [&](const CMatrix& q) { return ub->value(q); };
    f.grad = [&](const CMatrix& q) { return ub->grad(q); };
  }

  SolveDiagnostics diag;
  int total_iter = 0;

  auto lagrangian = [&](double mu) {
    SmoothFn h;
    h.value = [&, mu](const CMatrix& q) { return f.value(q) + mu * g_eval.value(q); };
    h.grad = [&, mu](const CMatrix& q) { return CMatrix(f.grad(q) + mu * g_eval.grad(q)); };
    return h;
  };

  auto finish = [&](const CMatrix& q, double mu, bool converged) {
    SolveResult out;
    out.q = q;
    diag.objective_bits = f.value(q);
    diag.constraint_bits = g_eval.value(q);
    diag.mu = mu;
    diag.iterations = total_iter;
    diag.converged = converged;
    diag.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    out.diag = diag;
    return out;
  };

  // Unconstrained pass: if the plain objective already meets the threshold,
  // the multiplier is zero by complementary slackness.
  InnerResult base = maximize_on_spectraplex(f, uniform, opts);
  total_iter += base.iterations;
  if (g_eval.value(base.q) >= opts.r_bd_bits - opts.slack_tol_bits) {
    return finish(base.q, 0.0, base.converged);
  }

  // Feasibility: maximize the constraint alone with the same inner solver.
  SmoothFn g_fn;
  g_fn.value = [&](const CMatrix& q) { return g_eval.value(q); };
  g_fn.grad = [&](const CMatrix& q) { return g_eval.grad(q); };
  InnerResult g_max = maximize_on_spectraplex(g_fn, uniform, opts);
  total_iter += g_max.iterations;
  if (g_max.value < opts.r_bd_bits - opts.slack_tol_bits) {
    throw InfeasibleError("solve_precoding: max achievable BD sum rate " +
                          std::to_string(g_max.value) + " bits below threshold " +
                          std::to_string(opts.r_bd_bits));
  }

  // Bracket the multiplier: g(Q_mu) is non-decreasing in mu.
  double mu_lo = 0.0;
  CMatrix q_lo = base.q;
  double mu_hi = 1.0;
  CMatrix q_hi = base.q;
  double g_hi = 0.0;
  bool bracketed = false;
  while (mu_hi <= opts.mu_max) {
    InnerResult r = maximize_on_spectraplex(lagrangian(mu_hi), q_hi, opts);
    total_iter += r.iterations;
    q_hi = r.q;
    g_hi = g_eval.value(q_hi);
    if (g_hi >= opts.r_bd_bits) {
      bracketed = true;
      break;
    }
    mu_lo = mu_hi;
    q_lo = q_hi;
    mu_hi *= 4.0;
  }
  if (!bracketed) {
    // Even mu_max keeps g below the threshold; accept only if within slack.
    if (g_hi >= opts.r_bd_bits - opts.slack_tol_bits) {
      return finish(q_hi, mu_hi / 4.0, true);
    }
    throw NoConvergenceError("solve_precoding: multiplier cap reached without meeting threshold");
  }

  // Bisection until the bracket is tight and the slack is within tolerance.
  CMatrix q_best = q_hi;
  double mu_best = mu_hi;
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    const double g_best = g_eval.value(q_best);
    if (std::abs(g_best - opts.r_bd_bits) <= opts.slack_tol_bits &&
        (mu_hi - mu_lo) <= 1e-3 * std::max(mu_hi, 1.0)) {
      return finish(q_best, mu_best, true);
    }
    const double mu_mid = 0.5 * (mu_lo + mu_hi);
    InnerResult r = maximize_on_spectraplex(lagrangian(mu_mid), q_best, opts);
    total_iter += r.iterations;
    const double g_mid = g_eval.value(r.q);
    if (g_mid >= opts.r_bd_bits) {
      mu_hi = mu_mid;
      q_hi = r.q;
      q_best = r.q;
      mu_best = mu_mid;
    } else {
      mu_lo = mu_mid;
      q_lo = r.q;
      // Keep the feasible side as the reported solution unless the slack is
      // already acceptable on the low side.
      if (g_mid >= opts.r_bd_bits - opts.slack_tol_bits) {
        q_best = r.q;
        mu_best = mu_mid;
      }
    }
  }
  const double g_final = g_eval.value(q_best);
  if (std::abs(g_final - opts.r_bd_bits) <= opts.slack_tol_bits) {
    return finish(q_best, mu_best, true);
  }
  throw NoConvergenceError("solve_precoding: bisection exhausted without complementary slackness");
}

PrecoderFactor covariance_to_precoder(const CMatrix& q, double tol) {
  const linalg::HermEig e = linalg::eigh(q);
  const double lambda_max = e.eigenvalues.size() > 0 ? e.eigenvalues.maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = e.eigenvalues.size() - 1; i >= 0; --i) {
    if (e.eigenvalues(i) > tol * lambda_max) keep.push_back(i);
  }
  PrecoderFactor out;
  out.m_s = static_cast<int>(keep.size());
  out.f.resize(q.rows(), out.m_s);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.f.col(static_cast<Eigen::Index>(k)) =
        e.eigenvectors.col(keep[k]) * std::sqrt(e.eigenvalues(keep[k]));
  }
  return out;
}

CMatrix direct_link_matching(const CMatrix& h_d, double p_bar, int m_t) {
  if (h_d.cols() != m_t) {
    throw DimensionError("direct_link_matching: H_d must have M_t columns");
  }
  const linalg::Svd s = linalg::svd(h_d);
  const double sigma_max = s.sigma.size() > 0 ? s.sigma.maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < s.sigma.size(); ++i) {
    if (s.sigma(i) > linalg::kRankTol * sigma_max) keep.push_back(i);
  }
  if (keep.empty()) {
    throw Error("direct_link_matching: H_d is numerically zero");
  }
  RVector gains(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    gains(static_cast<Eigen::Index>(k)) = p_bar * s.sigma(keep[k]) * s.sigma(keep[k]);
  }
  const RVector q = waterfill_simplex(gains);
  CMatrix f(m_t, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    f.col(static_cast<Eigen::Index>(k)) =
        s.v.col(keep[k]) * std::sqrt(q(static_cast<Eigen::Index>(k)));
  }
  return f;
}

RVector waterfill_simplex(const RVector& gains) {
  const Eigen::Index n = gains.size();
  if (n == 0) throw DimensionError("waterfill_simplex: empty gain vector");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return gains(a) > gains(b); });

  // Water level nu over the active set: q_i = nu - 1/gain_i, sum q = 1.
  double inv_sum = 0.0;
  double nu = 0.0;
  Eigen::Index active = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double gain = gains(order[static_cast<std::size_t>(k)]);
    if (!(gain > 0.0)) break;
    inv_sum += 1.0 / gain;
    const double candidate = (1.0 + inv_sum) / static_cast<double>(k + 1);
    if (candidate - 1.0 / gain > 0.0) {
      nu = candidate;
      active = k + 1;
    }
  }
  RVector q = RVector::Zero(n);
  for (Eigen::Index k = 0; k < active; ++k) {
    const Eigen::Index i = order[static_cast<std::size_t>(k)];
    q(i) = nu - 1.0 / gains(i);
  }
  return q;
}

}  // namespace srsim
