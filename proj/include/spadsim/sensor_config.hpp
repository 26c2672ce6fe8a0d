#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace spadsim {

/// Physical and mapping parameters of the simulated single-photon sensor.
///
/// q        detection probability per incident photon, in (0, 1]
/// tau_d    non-paralyzable dead time after each detection [s], >= 0
/// T        exposure time per binary frame [s], > 0
/// phi_max  photon flux mapped to intensity 255 [photons/s], > 0
/// linearize_srgb  if true, 8-bit intensities pass through the sRGB EOTF
///                 before the linear scale to flux
struct SensorConfig {
  double q = 0.45;
  double tau_d = 1.5e-7;
  double T = 1e-5;
  double phi_max = 1e8;
  bool linearize_srgb = false;

  /// Throws ConfigError listing every violated constraint.
  void validate() const;

  /// Canonical JSON form: sorted keys, shortest round-trip floats. Equal
  /// configs produce identical strings, so the hash is usable as identity.
  std::string canonical_json() const;

  /// SHA-256 hex of canonical_json().
  std::string hash() const;

  /// First 8 hex chars of hash(); embedded in output filenames.
  std::string hash8() const;
};

void to_json(nlohmann::json& j, const SensorConfig& cfg);
void from_json(const nlohmann::json& j, SensorConfig& cfg);

}  // namespace spadsim
