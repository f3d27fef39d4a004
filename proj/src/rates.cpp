#include "srsim/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "srsim/errors.hpp"
#include "srsim/threading.hpp"

namespace srsim {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_q(const CMatrix& q, double p_bar) {
  (void)p_bar;
  if (q.rows() != q.cols()) {
    throw DimensionError("primary_rate_instant: Q must be square");
  }
  if ((q - q.adjoint()).norm() > 1e-9 * std::max(1.0, q.norm())) {
    throw NonPsdError("primary_rate_instant: Q not Hermitian");
  }
  const linalg::HermEig e = linalg::eigh(q);
  if (e.eigenvalues.minCoeff() < -1e-9 * std::max(1.0, e.eigenvalues.maxCoeff())) {
    throw NonPsdError("primary_rate_instant: Q has negative eigenvalues");
  }
  if (q.trace().real() > 1.0 + 1e-9) {
    throw NonPsdError("primary_rate_instant: tr(Q) exceeds the unit power budget");
  }
}

}  // namespace

CVector BDSymbolSource::draw(int j_bds) {
  CVector c(j_bds);
  if (constellation_ == Constellation::kCscg) {
    for (int j = 0; j < j_bds; ++j) c(j) = rng_.cscg();
  } else {
    for (int j = 0; j < j_bds; ++j) {
      const std::uint64_t bits = rng_.next_u64();
      const double re = (bits & 1) ? kInvSqrt2 : -kInvSqrt2;
      const double im = (bits & 2) ? kInvSqrt2 : -kInvSqrt2;
      c(j) = Complex(re, im);
    }
  }
  return c;
}

CMatrix equivalent_channel(const ChannelSet& ch, const CVector& c, double alpha) {
  if (c.size() != static_cast<Eigen::Index>(ch.h.size())) {
    throw DimensionError("equivalent_channel: symbol vector length != number of BDs");
  }
  CMatrix h_eq = ch.h_d;
  const double root_alpha = std::sqrt(alpha);
  for (std::size_t j = 0; j < ch.h.size(); ++j) {
    if (ch.g[j].size() != h_eq.rows() || ch.h[j].size() != h_eq.cols()) {
      throw DimensionError("equivalent_channel: BD vector dimension mismatch");
    }
    h_eq.noalias() += (root_alpha * c(static_cast<Eigen::Index>(j))) * ch.g[j] * ch.h[j].adjoint();
  }
  return h_eq;
}

double primary_rate_instant(const CMatrix& h_eq, const CMatrix& q, double p_bar) {
  check_q(q, p_bar);
  return linalg::logdet_ipa(p_bar * h_eq * q * h_eq.adjoint());
}

McRate primary_rate_mc(const ChannelSet& ch, const CMatrix& q, const SystemParams& params,
                       const BDSymbolSource& source, int samples, int threads) {
  if (samples < 1) {
    throw ConfigError("primary_rate_mc: sample count must be >= 1");
  }
  check_q(q, params.p_bar());
  const double p_bar = params.p_bar();
  const std::vector<double> rates = parallel_map<double>(samples, threads, [&](int s) {
    BDSymbolSource src = source.substream(static_cast<std::uint64_t>(s));
    const CVector c = src.draw(params.j_bds);
    const CMatrix h_eq = equivalent_channel(ch, c, params.alpha);
    return linalg::logdet_ipa(p_bar * h_eq * q * h_eq.adjoint());
  });
  double mean = 0.0;
  for (double r : rates) mean += r;
  mean /= static_cast<double>(samples);
  double var = 0.0;
  for (double r : rates) var += (r - mean) * (r - mean);
  const double stderr_bits =
      samples > 1 ? std::sqrt(var / (static_cast<double>(samples) *
                                     static_cast<double>(samples - 1)))
                  : 0.0;
  return McRate{mean, stderr_bits};
}

std::vector<CVector> bd_effective_vectors(const ChannelSet& ch, const CMatrix& f,
                                          const SystemParams& params) {
  if (f.rows() != params.m_t) {
    throw DimensionError("bd_effective_vectors: F must have M_t rows");
  }
  const double scale = std::sqrt(static_cast<double>(params.k_spread) * params.p_watt() *
                                 params.alpha);
  std::vector<CVector> x;
  x.reserve(ch.h.size());
  for (std::size_t j = 0; j < ch.h.size(); ++j) {
    const CMatrix h_j = scale * ch.g[j] * (ch.h[j].adjoint() * f);
    x.push_back(linalg::vec(h_j));
  }
  return x;
}

BdRates mmse_sic(const std::vector<CVector>& x, double sigma2, int k_spread) {
  const int j_bds = static_cast<int>(x.size());
  BdRates out;
  out.per_bd_sinr = RVector::Zero(j_bds);
  out.decode_order.reserve(j_bds);
  if (j_bds == 0) {
    return out;
  }
  const Eigen::Index dim = x[0].size();
  for (const CVector& v : x) {
    if (v.size() != dim) throw DimensionError("mmse_sic: effective vectors differ in length");
  }

  std::vector<int> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return x[static_cast<std::size_t>(a)].squaredNorm() >
           x[static_cast<std::size_t>(b)].squaredNorm();
  });

  // Walk the order backwards, growing the residual interference covariance so
  // each BD sees only the not-yet-decoded ones.
  CMatrix cov = sigma2 * CMatrix::Identity(dim, dim);
  RVector sinr_by_position(j_bds);
  for (int pos = j_bds - 1; pos >= 0; --pos) {
    const CVector& v = x[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])];
    const CVector solved = cov.ldlt().solve(v);
    sinr_by_position(pos) = std::real(v.dot(solved));
    cov.noalias() += v * v.adjoint();
  }

  double sum = 0.0;
  for (int pos = 0; pos < j_bds; ++pos) {
    const int bd = order[static_cast<std::size_t>(pos)];
    out.per_bd_sinr(bd) = sinr_by_position(pos);
    out.decode_order.push_back(bd + 1);
    sum += std::log2(1.0 + sinr_by_position(pos));
  }
  out.sum_rate_bits = sum / static_cast<double>(k_spread);
  return out;
}

double bd_sumrate_logdet(const std::vector<CVector>& x, double sigma2, int k_spread) {
  if (x.empty()) {
    return 0.0;
  }
  const Eigen::Index dim = x[0].size();
  CMatrix gram = CMatrix::Zero(dim, dim);
  for (const CVector& v : x) {
    if (v.size() != dim) throw DimensionError("bd_sumrate_logdet: vectors differ in length");
    gram.noalias() += v * v.adjoint();
  }
  return linalg::logdet_ipa(gram / sigma2) / static_cast<double>(k_spread);
}

double bd_sumrate_kron(const CMatrix& q, const ChannelSet& ch, const SystemParams& params) {
  const int j_bds = static_cast<int>(ch.h.size());
  if (j_bds == 0) {
    return 0.0;
  }
  if (q.rows() != params.m_t || q.cols() != params.m_t) {
    throw DimensionError("bd_sumrate_kron: Q must be M_t x M_t");
  }
  const double c = static_cast<double>(params.k_spread) * params.p_bar() * params.alpha;

  CMatrix hmat(params.m_t, j_bds);
  CMatrix gmat(params.m_r, j_bds);
  for (int j = 0; j < j_bds; ++j) {
    hmat.col(j) = ch.h[static_cast<std::size_t>(j)];
    gmat.col(j) = ch.g[static_cast<std::size_t>(j)];
  }
  // Entry (j, l) of Psi^H (Q kron (H^H H)^T) Psi is (g_j^H g_l)(h_l^H Q h_j).
  const CMatrix gram_g = gmat.adjoint() * gmat;
  const CMatrix hqh = hmat.adjoint() * q * hmat;  // (l, j) entry = h_l^H Q h_j
  const CMatrix m = c * gram_g.cwiseProduct(hqh.transpose());
  return linalg::logdet_ipa(m) / static_cast<double>(params.k_spread);
}

RateReport make_rate_report(const ChannelSet& ch, const CMatrix& q, const CMatrix& f,
                            const SystemParams& params, const BDSymbolSource& source,
                            int samples, int threads) {
  RateReport report;
  const McRate mc = primary_rate_mc(ch, q, params, source, samples, threads);
  report.primary_rate_bits = mc.mean_bits;
  report.primary_rate_stderr = mc.stderr_bits;
  const std::vector<CVector> x = bd_effective_vectors(ch, f, params);
  const BdRates bd = mmse_sic(x, params.sigma2_watt(), params.k_spread);
  report.bd_sum_rate_bits = bd.sum_rate_bits;
  report.per_bd_sinr = bd.per_bd_sinr;
  report.decode_order = bd.decode_order;
  return report;
}

}  // namespace srsim
