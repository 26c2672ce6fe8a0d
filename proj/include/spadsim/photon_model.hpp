#pragma once

#include <cmath>

#include "spadsim/errors.hpp"
#include "spadsim/sensor_config.hpp"

namespace spadsim {

// Detection model. Photons arrive as a Poisson process with flux phi; each
// arrival is detected with probability q, so detectable events form a
// Poisson process of rate lambda = q*phi. After every detection the pixel is
// blind for a fixed dead time tau_d (non-paralyzable: arrivals during the
// blind window are dropped and do not extend it). Detections therefore form
// a renewal process whose inter-detection gap is tau_d + Exp(lambda).
//
// Over an exposure T the detection count N has, to leading renewal order,
//   E[N]   = lambda*T / (1 + lambda*tau_d)
//   Var[N] = lambda*T / (1 + lambda*tau_d)^3
// Both are asymptotics in T / (tau_d + 1/lambda); they are excellent through
// lambda*tau_d ~ 1 and degrade (variance first) once dead time dominates the
// gap, where N concentrates near its ceiling floor(T/tau_d) + 1.
//
// The binary measurement is exact, not asymptotic: the frame records a 1 iff
// at least one detection lands in [0, T]. The first detection is at
// Exp(lambda) (no dead time has been triggered yet), so
//   P(bit = 1) = P(Exp(lambda) <= T) = 1 - exp(-lambda*T),
// independent of tau_d.

struct PhotonStats {
  double mean = 0.0;
  double variance = 0.0;
  double bit_prob = 0.0;
};

inline void check_flux(double phi) {
  if (!(std::isfinite(phi) && phi >= 0.0))
    throw InputError("flux must be finite and >= 0 photons/s");
}

/// E[N] = q*phi*T / (1 + q*phi*tau_d).
inline double expected_count(double phi, const SensorConfig& cfg) {
  cfg.validate();
  check_flux(phi);
  const double lam = cfg.q * phi;
  return lam * cfg.T / (1.0 + lam * cfg.tau_d);
}

/// Var[N] = q*phi*T / (1 + q*phi*tau_d)^3. Sub-Poissonian for tau_d > 0:
/// dead time regularizes the detection train.
inline double variance_count(double phi, const SensorConfig& cfg) {
  cfg.validate();
  check_flux(phi);
  const double lam = cfg.q * phi;
  const double d = 1.0 + lam * cfg.tau_d;
  return lam * cfg.T / (d * d * d);
}

/// P(N > 0) = 1 - exp(-q*phi*T); exact for any tau_d (see note above).
/// expm1 keeps precision at small q*phi*T.
inline double bit_probability(double phi, const SensorConfig& cfg) {
  cfg.validate();
  check_flux(phi);
  return -std::expm1(-cfg.q * phi * cfg.T);
}

inline PhotonStats photon_stats(double phi, const SensorConfig& cfg) {
  return PhotonStats{expected_count(phi, cfg), variance_count(phi, cfg),
                     bit_probability(phi, cfg)};
}

}  // namespace spadsim
