#pragma once

#include <vector>

#include "srsim/channel.hpp"

namespace srsim {

// Stream of i.i.d. zero-mean unit-power BD symbol vectors.
class BDSymbolSource {
 public:
  BDSymbolSource(Constellation constellation, const Rng& rng)
      : constellation_(constellation), rng_(rng) {}

  // One block of J symbols, one per BD.
  CVector draw(int j_bds);

  // Independent source for Monte Carlo sample `index`; thread-safe fan-out.
  BDSymbolSource substream(std::uint64_t index) const {
    return BDSymbolSource(constellation_, rng_.substream(index));
  }

  Constellation constellation() const { return constellation_; }

 private:
  Constellation constellation_;
  Rng rng_;
};

// BD-side decoding result of the MMSE-SIC receiver.
struct BdRates {
  RVector per_bd_sinr;            // indexed by BD (not decode position)
  std::vector<int> decode_order;  // 1-based BD indices, strongest first
  double sum_rate_bits = 0.0;     // (1/K) sum log2(1 + sinr)
};

struct RateReport {
  double primary_rate_bits = 0.0;
  double primary_rate_stderr = 0.0;
  double bd_sum_rate_bits = 0.0;
  RVector per_bd_sinr;
  std::vector<int> decode_order;
};

struct McRate {
  double mean_bits = 0.0;
  double stderr_bits = 0.0;
};

// H_eq = H_d + sqrt(alpha) sum_j g_j h_j^H c_j.
CMatrix equivalent_channel(const ChannelSet& ch, const CVector& c, double alpha);

// log2|I + Pbar H_eq Q H_eq^H| for one BD symbol draw.
double primary_rate_instant(const CMatrix& h_eq, const CMatrix& q, double p_bar);

// Sample mean of the instant rate over `samples` i.i.d. BD symbol draws.
McRate primary_rate_mc(const ChannelSet& ch, const CMatrix& q, const SystemParams& params,
                       const BDSymbolSource& source, int samples, int threads = 1);

// x_j = vec( sqrt(K P alpha) g_j h_j^H F ), length M_r * M_s.
std::vector<CVector> bd_effective_vectors(const ChannelSet& ch, const CMatrix& f,
                                          const SystemParams& params);

// MMSE-SIC over the BD multiple-access channel: decode in descending ||x_j||^2
// (ties by BD index), SINR_j = x_j^H (sum_{later} x x^H + sigma2 I)^-1 x_j.
BdRates mmse_sic(const std::vector<CVector>& x, double sigma2, int k_spread);

// (1/K) log2| I + (1/sigma2) sum_j x_j x_j^H |.
double bd_sumrate_logdet(const std::vector<CVector>& x, double sigma2, int k_spread);

// (1/K) log2| I_J + K Pbar alpha Psi^H (Q kron (H^H H)^T) Psi | with
// H = [g_1 h_1^H, ..., g_J h_J^H]; entries assembled blockwise as
// K Pbar alpha (g_j^H g_l)(h_l^H Q h_j). Independent of any factorization of Q.
double bd_sumrate_kron(const CMatrix& q, const ChannelSet& ch, const SystemParams& params);

// Full per-realization report: Monte Carlo primary rate plus MMSE-SIC BD rates
// for the precoder F satisfying F F^H = Q.
RateReport make_rate_report(const ChannelSet& ch, const CMatrix& q, const CMatrix& f,
                            const SystemParams& params, const BDSymbolSource& source,
                            int samples, int threads = 1);

}  // namespace srsim
