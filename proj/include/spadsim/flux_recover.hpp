#pragma once

#include <cstdint>
#include <vector>

#include "spadsim/frame_synth.hpp"
#include "spadsim/sensor_config.hpp"

namespace spadsim {

/// Accumulated bit counts over a burst of binary frames.
struct BitStack {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::uint32_t n_frames = 0;
  std::vector<std::uint32_t> ones;  // set-bit count per pixel/channel

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
};

/// Folds frames into a stack. All frames must share dimensions; a bit is
/// "set" iff the stored byte is nonzero.
BitStack accumulate_bits(const std::vector<BinaryFrame>& frames);
void accumulate_frame(BitStack& stack, const BinaryFrame& frame);

struct FluxEstimate {
  FluxMap flux;                          // photons/s, source_id "recovered"
  std::vector<std::uint8_t> saturated;   // 255 where p_hat was clamped
  std::size_t saturated_count = 0;
};

/// Maximum-likelihood flux from per-pixel bit rates: with p_hat = ones/n,
///   phi_hat = -ln(1 - p_hat) / (q * T).
/// Pixels with p_hat = 1 carry no upper-bound information; they are clamped
/// to p_hat = 1 - 1/(2n) and flagged in the saturation mask.
FluxEstimate estimate_flux_from_bits(const BitStack& stack,
                                     const SensorConfig& cfg);

/// Inverts the expected-count law: n = q*phi*T / (1 + q*phi*tau_d) gives
///   phi = n / (q * (T - n*tau_d)).
/// This composes with expected_count to the identity. Throws SaturationError
/// when n*tau_d >= T (the dead time of n detections fills the exposure, so
/// no finite flux explains the count).
double estimate_flux_from_count(double mean_count, const SensorConfig& cfg);

}  // namespace spadsim
