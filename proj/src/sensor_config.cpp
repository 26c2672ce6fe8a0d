#include "spadsim/sensor_config.hpp"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "spadsim/errors.hpp"
#include "spadsim/hash.hpp"

namespace spadsim {

void SensorConfig::validate() const {
  std::string bad;
  auto flag = [&bad](const char* msg) {
    if (!bad.empty()) bad += "; ";
    bad += msg;
  };
  if (!(std::isfinite(q) && q > 0.0 && q <= 1.0))
    flag("q must be in (0, 1]");
  if (!(std::isfinite(tau_d) && tau_d >= 0.0))
    flag("tau_d must be finite and >= 0");
  if (!(std::isfinite(T) && T > 0.0)) flag("T must be finite and > 0");
  if (!(std::isfinite(phi_max) && phi_max > 0.0))
    flag("phi_max must be finite and > 0");
  if (!bad.empty()) throw ConfigError("invalid sensor config: " + bad);
}

void to_json(nlohmann::json& j, const SensorConfig& cfg) {
  j = nlohmann::json{{"T", cfg.T},
                     {"linearize_srgb", cfg.linearize_srgb},
                     {"phi_max", cfg.phi_max},
                     {"q", cfg.q},
                     {"tau_d", cfg.tau_d}};
}

void from_json(const nlohmann::json& j, SensorConfig& cfg) {
  try {
    j.at("q").get_to(cfg.q);
    j.at("tau_d").get_to(cfg.tau_d);
    j.at("T").get_to(cfg.T);
    j.at("phi_max").get_to(cfg.phi_max);
    j.at("linearize_srgb").get_to(cfg.linearize_srgb);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sensor config json: ") + e.what());
  }
}

std::string SensorConfig::canonical_json() const {
  nlohmann::json j;
  to_json(j, *this);
  return j.dump();  // nlohmann objects iterate key-sorted
}

std::string SensorConfig::hash() const { return sha256_hex(canonical_json()); }

std::string SensorConfig::hash8() const { return hash().substr(0, 8); }

}  // namespace spadsim
