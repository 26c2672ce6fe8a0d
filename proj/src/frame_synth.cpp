#include "spadsim/frame_synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spadsim/errors.hpp"
#include "spadsim/parallel.hpp"
#include "spadsim/photon_model.hpp"

namespace spadsim {

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

FluxMap intensity_to_flux(const ImageU8& image, const SensorConfig& cfg) {
  cfg.validate();
  if (image.empty()) throw InputError("intensity_to_flux: empty image");
  FluxMap flux;
  flux.width = image.width;
  flux.height = image.height;
  flux.channels = image.channels;
  flux.data.resize(image.size());
  // 256 possible inputs; precompute the mapping once
  double lut[256];
  for (int v = 0; v < 256; ++v) {
    const double rel = static_cast<double>(v) / 255.0;
    lut[v] = (cfg.linearize_srgb ? srgb_to_linear(rel) : rel) * cfg.phi_max;
  }
  for (std::size_t i = 0; i < image.size(); ++i)
    flux.data[i] = lut[image.data[i]];
  return flux;
}

static void validate_flux(const FluxMap& flux) {
  if (flux.width <= 0 || flux.height <= 0 ||
      (flux.channels != 1 && flux.channels != 3))
    throw InputError("flux map has bad dimensions");
  if (flux.data.size() != static_cast<std::size_t>(flux.width) *
                              flux.height * flux.channels)
    throw InputError("flux map data size does not match dimensions");
  for (double v : flux.data)
    if (!(std::isfinite(v) && v >= 0.0))
      throw InputError("flux map contains negative or non-finite entries");
}

BinaryFrame synthesize_binary_frame(const FluxMap& flux,
                                    const SensorConfig& cfg,
                                    std::uint64_t seed,
                                    std::uint32_t frame_index,
                                    SampleMode mode, int jobs) {
  cfg.validate();
  validate_flux(flux);
  BinaryFrame frame;
  frame.width = flux.width;
  frame.height = flux.height;
  frame.channels = flux.channels;
  frame.bits.resize(flux.data.size());
  frame.seed = seed;
  frame.frame_index = frame_index;
  frame.config_hash = cfg.hash();
  const int w = flux.width;
  const int ch = flux.channels;
  parallel_for(static_cast<std::size_t>(flux.height), jobs,
               [&](std::size_t y0, std::size_t y1) {
                 for (std::size_t y = y0; y < y1; ++y) {
                   std::size_t i = (y * w) * ch;
                   for (int x = 0; x < w; ++x) {
                     for (int c = 0; c < ch; ++c, ++i) {
                       const RngKey key{seed, frame_index,
                                        static_cast<std::uint32_t>(x),
                                        static_cast<std::uint32_t>(y),
                                        static_cast<std::uint8_t>(c)};
                       const std::uint32_t n =
                           sample_count(flux.data[i], cfg, key, mode);
                       frame.bits[i] = n > 0 ? 255 : 0;
                     }
                   }
                 }
               });
  return frame;
}

std::vector<BinaryFrame> synthesize_burst(const FluxMap& flux,
                                          const SensorConfig& cfg,
                                          std::uint64_t seed,
                                          std::uint32_t n_frames,
                                          SampleMode mode, int jobs) {
  std::vector<BinaryFrame> burst;
  burst.reserve(n_frames);
  for (std::uint32_t f = 0; f < n_frames; ++f)
    burst.push_back(synthesize_binary_frame(flux, cfg, seed, f, mode, jobs));
  return burst;
}

std::vector<double> channel_bit_density(const BinaryFrame& frame) {
  std::vector<double> density(frame.channels, 0.0);
  std::vector<std::size_t> ones(frame.channels, 0);
  for (std::size_t i = 0; i < frame.bits.size(); ++i)
    if (frame.bits[i]) ++ones[i % frame.channels];
  const double per =
      static_cast<double>(frame.width) * static_cast<double>(frame.height);
  for (int c = 0; c < frame.channels; ++c)
    density[c] = static_cast<double>(ones[c]) / per;
  return density;
}

// Bit density depends on flux only through the multiset of values, and u8
// sources produce at most 256 distinct fluxes, so evaluate the predicted
// density over a value histogram instead of every pixel.
static std::map<double, std::size_t> flux_histogram(const FluxMap& flux) {
  std::map<double, std::size_t> hist;
  for (double v : flux.data) ++hist[v];
  return hist;
}

double exposure_for_histogram(const std::map<double, std::size_t>& hist,
                              const SensorConfig& cfg, double target) {
  if (!(target > 0.0 && target < 1.0))
    throw InputError("auto_exposure: target density must be in (0, 1)");
  std::size_t total = 0;
  for (const auto& [v, n] : hist) total += n;
  if (total == 0) throw InputError("auto_exposure: empty flux map");
  const auto density = [&](double T) {
    double acc = 0.0;
    for (const auto& [v, n] : hist)
      acc += static_cast<double>(n) * -std::expm1(-cfg.q * v * T);
    return acc / static_cast<double>(total);
  };
  double lo = 1e-12, hi = 1e3;
  const double d_lo = density(lo), d_hi = density(hi);
  if (d_hi + 1e-6 < target)
    throw Error("auto_exposure: target density unreachable below T = 1e3 s "
                "(is the flux map all zero?)");
  if (d_lo > target + 1e-6)
    throw Error("auto_exposure: density exceeds target even at T = 1e-12 s");
  double mid = std::sqrt(lo * hi);
  for (int i = 0; i < 200; ++i) {
    mid = std::sqrt(lo * hi);
    const double d = density(mid);
    if (std::abs(d - target) < 1e-6) return mid;
    (d < target ? lo : hi) = mid;
  }
  throw Error("auto_exposure: bisection failed to converge");
}

double auto_exposure(const FluxMap& flux, const SensorConfig& cfg,
                     double target_density) {
  cfg.validate();
  validate_flux(flux);
  return exposure_for_histogram(flux_histogram(flux), cfg, target_density);
}

ImageU8 frame_to_image(const BinaryFrame& frame) {
  ImageU8 img = make_image(frame.width, frame.height, frame.channels);
  img.data = frame.bits;
  return img;
}

}  // namespace spadsim
