#include "spadsim/flux_recover.hpp"

#include <cmath>

#include "spadsim/errors.hpp"

namespace spadsim {

void accumulate_frame(BitStack& stack, const BinaryFrame& frame) {
  if (frame.bits.empty()) throw InputError("accumulate_frame: empty frame");
  if (stack.n_frames == 0 && stack.ones.empty()) {
    stack.width = frame.width;
    stack.height = frame.height;
    stack.channels = frame.channels;
    stack.ones.assign(frame.bits.size(), 0);
  }
  if (frame.width != stack.width || frame.height != stack.height ||
      frame.channels != stack.channels)
    throw InputError("accumulate_frame: frame dimensions differ from stack");
  for (std::size_t i = 0; i < frame.bits.size(); ++i)
    if (frame.bits[i]) ++stack.ones[i];
  ++stack.n_frames;
}

BitStack accumulate_bits(const std::vector<BinaryFrame>& frames) {
  if (frames.empty()) throw InputError("accumulate_bits: no frames");
  BitStack stack;
  for (const auto& f : frames) accumulate_frame(stack, f);
  return stack;
}

FluxEstimate estimate_flux_from_bits(const BitStack& stack,
                                     const SensorConfig& cfg) {
  cfg.validate();
  if (stack.n_frames == 0 || stack.ones.empty())
    throw InputError("estimate_flux_from_bits: empty stack");
  FluxEstimate est;
  est.flux.width = stack.width;
  est.flux.height = stack.height;
  est.flux.channels = stack.channels;
  est.flux.data.resize(stack.ones.size());
  est.flux.source_id = "recovered";
  est.saturated.assign(stack.ones.size(), 0);
  const double n = stack.n_frames;
  const double p_clamp = 1.0 - 1.0 / (2.0 * n);
  const double denom = cfg.q * cfg.T;
  for (std::size_t i = 0; i < stack.ones.size(); ++i) {
    double p = static_cast<double>(stack.ones[i]) / n;
    if (stack.ones[i] >= stack.n_frames) {
      p = p_clamp;
      est.saturated[i] = 255;
      ++est.saturated_count;
    }
    est.flux.data[i] = -std::log1p(-p) / denom;
  }
  return est;
}

double estimate_flux_from_count(double mean_count, const SensorConfig& cfg) {
  cfg.validate();
  if (!(std::isfinite(mean_count) && mean_count >= 0.0))
    throw InputError("estimate_flux_from_count: count must be >= 0");
  if (mean_count == 0.0) return 0.0;
  const double budget = cfg.T - mean_count * cfg.tau_d;
  if (budget <= 0.0)
    throw SaturationError(
        "estimate_flux_from_count: count * tau_d >= T, no finite flux "
        "produces this mean");
  return mean_count / (cfg.q * budget);
}

}  // namespace spadsim
