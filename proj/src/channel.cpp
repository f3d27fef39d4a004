#include "srsim/channel.hpp"

#include <cmath>
#include <numbers>

#include "srsim/errors.hpp"

namespace srsim {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

// Substream tags for scenario sampling.
constexpr std::uint64_t kTagBdPosition = 0x01;
constexpr std::uint64_t kTagBdForward = 0x02;   // PT -> BD fading
constexpr std::uint64_t kTagBdBackward = 0x03;  // BD -> AP fading

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double distance(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double bearing(const std::array<double, 2>& from, const std::array<double, 2>& to) {
  return std::atan2(to[1] - from[1], to[0] - from[0]);
}

}  // namespace

double SystemParams::p_watt() const { return dbm_to_watt(p_dbm); }

double SystemParams::sigma2_watt() const { return dbm_to_watt(sigma2_dbm); }

double SystemParams::p_bar() const { return std::pow(10.0, (p_dbm - sigma2_dbm) / 10.0); }

void SystemParams::validate() const {
  if (m_t < 1 || m_r < 1) throw ConfigError("params: antenna counts must be >= 1");
  if (j_bds < 0) throw ConfigError("params: J must be >= 0");
  if (k_spread < 1) throw ConfigError("params: K must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("params: alpha must be in [0, 1]");
  if (!std::isfinite(p_dbm) || !std::isfinite(sigma2_dbm)) {
    throw ConfigError("params: powers must be finite");
  }
}

void Scenario::validate() const {
  if (!(bd_radius > 0.0)) throw ConfigError("scenario: bd_radius must be > 0");
  if (!(carrier_hz > 0.0)) throw ConfigError("scenario: carrier_hz must be > 0");
  if (gamma_ta < 0.0 || gamma_tb < 0.0) {
    throw ConfigError("scenario: path-loss exponents must be >= 0");
  }
  if (!(cascade_scale > 0.0)) throw ConfigError("scenario: cascade_scale must be > 0");
}

double pathloss(double distance_m, double gamma, double carrier_hz) {
  if (!(distance_m > 0.0)) {
    throw NonPositiveDistanceError("pathloss: distance must be > 0");
  }
  const double lambda = kSpeedOfLight / carrier_hz;
  const double beta0 = std::pow(lambda / (4.0 * std::numbers::pi), 2);
  return beta0 * std::pow(distance_m, -gamma);
}

CVector ula_steering(double angle_rad, int n) {
  CVector a(n);
  const double phase = std::numbers::pi * std::sin(angle_rad);
  for (int m = 0; m < n; ++m) {
    a(m) = std::polar(1.0, phase * static_cast<double>(m));
  }
  return a;
}

CMatrix los_channel(const Scenario& sc, int m_t, int m_r) {
  const double d = distance(sc.pt_position, sc.ap_position);
  const double beta_hd = pathloss(d, sc.gamma_ta, sc.carrier_hz);
  const double theta = bearing(sc.pt_position, sc.ap_position);
  const CVector a_r = ula_steering(theta, m_r);
  const CVector a_t = ula_steering(theta, m_t);
  return std::sqrt(beta_hd) * a_r * a_t.adjoint();
}

CVector rician(double beta, double rice_k_db, int dim, double los_angle_rad, Rng& rng) {
  if (!(beta > 0.0)) {
    throw Error("rician: beta must be > 0");
  }
  const double kappa = std::pow(10.0, rice_k_db / 10.0);
  const double w_los = std::sqrt(kappa / (1.0 + kappa));
  const double w_nlos = std::sqrt(1.0 / (1.0 + kappa));
  const CVector a = ula_steering(los_angle_rad, dim);
  CVector w(dim);
  for (int i = 0; i < dim; ++i) {
    w(i) = rng.cscg();
  }
  return std::sqrt(beta) * (w_los * a + w_nlos * w);
}

ChannelSet sample_scenario(const Scenario& sc, const SystemParams& params, const Rng& rng) {
  sc.validate();
  params.validate();

  ChannelSet ch;
  ch.h_d = los_channel(sc, params.m_t, params.m_r);
  ch.beta_hd = pathloss(distance(sc.pt_position, sc.ap_position), sc.gamma_ta, sc.carrier_hz);

  const int j_bds = params.j_bds;
  ch.h.reserve(j_bds);
  ch.g.reserve(j_bds);
  ch.beta_h.reserve(j_bds);
  ch.beta_g.reserve(j_bds);

  for (int j = 0; j < j_bds; ++j) {
    Rng pos_rng = rng.substream(kTagBdPosition, static_cast<std::uint64_t>(j));
    // Uniform on the disc: radius by inverse CDF R*sqrt(u), angle uniform.
    const double r = sc.bd_radius * std::sqrt(pos_rng.uniform01());
    const double phi = 2.0 * std::numbers::pi * pos_rng.uniform01();
    const std::array<double, 2> bd_pos{sc.bd_center[0] + r * std::cos(phi),
                                       sc.bd_center[1] + r * std::sin(phi)};

    const double d_tb = distance(sc.pt_position, bd_pos);
    const double beta_h = pathloss(d_tb, sc.gamma_tb, sc.carrier_hz);
    // The cascaded gain beta_hg = cascade_scale * beta_h is split so that the
    // BD -> AP leg carries the constant factor: beta_g = cascade_scale.
    const double beta_g = sc.cascade_scale;

    Rng h_rng = rng.substream(kTagBdForward, static_cast<std::uint64_t>(j));
    Rng g_rng = rng.substream(kTagBdBackward, static_cast<std::uint64_t>(j));
    const double angle_tb = bearing(sc.pt_position, bd_pos);
    const double angle_ba = bearing(bd_pos, sc.ap_position);

    ch.beta_h.push_back(beta_h);
    ch.beta_g.push_back(beta_g);
    ch.h.push_back(rician(beta_h, sc.rice_k_db, params.m_t, angle_tb, h_rng));
    ch.g.push_back(rician(beta_g, sc.rice_k_db, params.m_r, angle_ba, g_rng));
    ch.bd_positions.push_back(bd_pos);
  }
  return ch;
}

}  // namespace srsim
