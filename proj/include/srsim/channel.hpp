#pragma once

#include <array>
#include <vector>

#include "srsim/linalg.hpp"
#include "srsim/rng.hpp"

namespace srsim {

enum class Constellation { kCscg, kQpsk };

// Scalar system constants. Transmit SNR is always recomputed from the dBm
// fields; there is no cached copy to drift out of sync.
struct SystemParams {
  int m_t = 4;       // PT antennas
  int m_r = 8;       // AP antennas
  int j_bds = 50;    // number of backscatter devices
  int k_spread = 128;  // BD symbol duration in PT symbol periods
  double p_dbm = 0.0;
  double sigma2_dbm = -110.0;
  double alpha = 1.0;  // backscattered power fraction
  Constellation constellation = Constellation::kCscg;

  double p_watt() const;
  double sigma2_watt() const;
  double p_bar() const;  // P / sigma^2
  void validate() const;
};

// Deployment geometry and propagation constants. Defaults: PT at the origin,
// AP at (200, 0), BDs uniform on a 5 m disc centered at (180, 20), 3.5 GHz
// carrier, path-loss exponents 2 (PT-AP) and 2.7 (PT-BD), Rician K = 10 dB,
// cascaded-link scale beta_hg = 0.01 * beta_h.
struct Scenario {
  std::array<double, 2> pt_position{0.0, 0.0};
  std::array<double, 2> ap_position{200.0, 0.0};
  std::array<double, 2> bd_center{180.0, 20.0};
  double bd_radius = 5.0;
  double carrier_hz = 3.5e9;
  double gamma_ta = 2.0;
  double gamma_tb = 2.7;
  double rice_k_db = 10.0;
  double cascade_scale = 0.01;

  void validate() const;
};

// One fading realization plus large-scale gains.
struct ChannelSet {
  CMatrix h_d;             // M_r x M_t direct link
  std::vector<CVector> h;  // PT -> BD j, length M_t each
  std::vector<CVector> g;  // BD j -> AP, length M_r each
  std::vector<double> beta_h;
  std::vector<double> beta_g;
  double beta_hd = 0.0;
  std::vector<std::array<double, 2>> bd_positions;  // meters, same order as h/g
};

// beta = (lambda / 4 pi)^2 * d^-gamma with lambda = c / f.
double pathloss(double distance_m, double gamma, double carrier_hz);

// Half-wavelength ULA steering vector, entries exp(i pi m sin(angle)).
CVector ula_steering(double angle_rad, int n);

// Rank-1 LoS direct link sqrt(beta_hd) a_r(theta) a_t(theta)^H from the
// PT -> AP geometry; every entry has magnitude sqrt(beta_hd).
CMatrix los_channel(const Scenario& sc, int m_t, int m_r);

// Rician fading vector with unit-modulus steering LoS component:
//   h = sqrt(beta) ( sqrt(kappa/(1+kappa)) a(los_angle) + sqrt(1/(1+kappa)) w ),
// w i.i.d. CN(0, 1).
CVector rician(double beta, double rice_k_db, int dim, double los_angle_rad, Rng& rng);

// Full scenario draw: BD positions uniform on the disc (inverse-CDF radius),
// large-scale gains from the geometry, direct link LoS, BD links Rician with
// geometric LoS angles. Pure in (scenario, params, rng key) — one substream
// per BD, so the result does not depend on evaluation order.
ChannelSet sample_scenario(const Scenario& sc, const SystemParams& params, const Rng& rng);

}  // namespace srsim
