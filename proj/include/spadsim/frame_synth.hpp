#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spadsim/image.hpp"
#include "spadsim/sampler.hpp"
#include "spadsim/sensor_config.hpp"

namespace spadsim {

/// Per-pixel, per-channel photon flux in photons/second.
struct FluxMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;  // row-major, channel-interleaved
  std::string source_id;     // provenance tag, e.g. source filename

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  double at(int x, int y, int c) const { return data[index(x, y, c)]; }
  double& at(int x, int y, int c) { return data[index(x, y, c)]; }
};

/// One simulated binary exposure. bits holds exactly 0 or 255 per sample.
struct BinaryFrame {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> bits;
  std::uint64_t seed = 0;
  std::uint32_t frame_index = 0;
  std::string config_hash;
};

/// sRGB EOTF for v in [0, 1].
double srgb_to_linear(double v);

/// Maps 8-bit intensities to flux: phi = rel * phi_max where rel is v/255,
/// optionally pushed through the sRGB EOTF first. Output entries lie in
/// [0, phi_max].
FluxMap intensity_to_flux(const ImageU8& image, const SensorConfig& cfg);

/// Simulates one binary frame. Every pixel/channel draws from its own
/// counter-based stream keyed by (seed, frame_index, x, y, channel), so the
/// result is byte-identical for any jobs value.
BinaryFrame synthesize_binary_frame(const FluxMap& flux,
                                    const SensorConfig& cfg,
                                    std::uint64_t seed,
                                    std::uint32_t frame_index,
                                    SampleMode mode = SampleMode::kExactRenewal,
                                    int jobs = 1);

/// Frames 0..n_frames-1 under one seed.
std::vector<BinaryFrame> synthesize_burst(
    const FluxMap& flux, const SensorConfig& cfg, std::uint64_t seed,
    std::uint32_t n_frames, SampleMode mode = SampleMode::kExactRenewal,
    int jobs = 1);

/// Fraction of set bits per channel.
std::vector<double> channel_bit_density(const BinaryFrame& frame);

/// Solves for the exposure T* whose mean predicted bit density over the flux
/// map equals target (|density - target| < 1e-6), by bisection on log T over
/// [1e-12, 1e3] s. Throws Error if the target is unreachable in the bracket,
/// InputError if target is outside (0, 1).
double auto_exposure(const FluxMap& flux, const SensorConfig& cfg,
                     double target_density);

/// Same solve over a flux-value histogram (value -> sample count). Lets a
/// caller pool several sources into one exposure decision.
double exposure_for_histogram(const std::map<double, std::size_t>& hist,
                              const SensorConfig& cfg, double target);

/// View of the frame as an 8-bit image (shares nothing; copies bits).
ImageU8 frame_to_image(const BinaryFrame& frame);

}  // namespace spadsim
