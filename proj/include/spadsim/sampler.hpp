#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "spadsim/errors.hpp"
#include "spadsim/photon_model.hpp"
#include "spadsim/rng.hpp"
#include "spadsim/sensor_config.hpp"

namespace spadsim {

enum class SampleMode {
  kExactRenewal,    // simulate the detection train event by event
  kGaussianApprox,  // one rounded normal draw from the closed-form moments
};

inline std::string_view to_string(SampleMode mode) {
  return mode == SampleMode::kExactRenewal ? "exact_renewal"
                                           : "gaussian_approx";
}

inline SampleMode parse_sample_mode(std::string_view name) {
  if (name == "exact_renewal" || name == "exact") return SampleMode::kExactRenewal;
  if (name == "gaussian_approx" || name == "gaussian")
    return SampleMode::kGaussianApprox;
  throw InputError("unknown sample mode '" + std::string(name) +
                   "' (expected exact_renewal or gaussian_approx)");
}

/// Hard ceiling on detections per draw. Only reachable with tau_d = 0 and
/// enormous q*phi*T; with dead time the count is capped at T/tau_d + 1
/// physically. Exceeding the cap throws rather than truncating.
inline constexpr std::uint64_t kDefaultIterationCap = 10'000'000;

/// Draws the detection count by walking the renewal process: first gap
/// Exp(q*phi), every later gap tau_d + Exp(q*phi). Deterministic in key.
inline std::uint32_t sample_count_exact(
    double phi, const SensorConfig& cfg, const RngKey& key,
    std::uint64_t iteration_cap = kDefaultIterationCap) {
  cfg.validate();
  check_flux(phi);
  const double rate = cfg.q * phi;
  if (rate <= 0.0) return 0;
  Stream s = derive_stream(key);
  double t = s.exponential(rate);
  std::uint32_t count = 0;
  while (t <= cfg.T) {
    if (static_cast<std::uint64_t>(count) >= iteration_cap)
      throw Error("sample_count_exact: iteration cap exceeded (" +
                  std::to_string(iteration_cap) + " detections in one draw)");
    ++count;
    t += cfg.tau_d + s.exponential(rate);
  }
  return count;
}

/// Gaussian shortcut: Normal(expected_count, sqrt(variance_count)), rounded
/// to nearest, clamped below at zero. Useful when counts are large and the
/// event walk is too slow; inherits the closed forms' asymptotic error.
inline std::uint32_t sample_count_gaussian(double phi, const SensorConfig& cfg,
                                           const RngKey& key) {
  cfg.validate();
  check_flux(phi);
  const double mean = expected_count(phi, cfg);
  if (mean <= 0.0) return 0;
  const double sd = std::sqrt(variance_count(phi, cfg));
  Stream s = derive_stream(key);
  const double draw = mean + sd * s.normal();
  if (draw <= 0.0) return 0;
  return static_cast<std::uint32_t>(std::llround(draw));
}

inline std::uint32_t sample_count(
    double phi, const SensorConfig& cfg, const RngKey& key, SampleMode mode,
    std::uint64_t iteration_cap = kDefaultIterationCap) {
  return mode == SampleMode::kExactRenewal
             ? sample_count_exact(phi, cfg, key, iteration_cap)
             : sample_count_gaussian(phi, cfg, key);
}

}  // namespace spadsim
