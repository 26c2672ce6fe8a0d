#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "spadsim/image.hpp"

namespace spadsim {

struct FluxMap;  // frame_synth.hpp

/// Decodes a PNG/JPEG file to 3-channel RGB (grayscale sources are
/// replicated). Throws InputError if missing or undecodable.
ImageU8 read_image_rgb(const std::filesystem::path& path);

/// PNG-encodes with pinned settings (zlib level 6, no filters heuristics
/// beyond the encoder default, which is deterministic for fixed input).
/// Output bytes are stable across runs, which the manifest hashes rely on.
std::vector<std::uint8_t> encode_png(const ImageU8& img);

void write_bytes(const std::filesystem::path& path,
                 const std::vector<std::uint8_t>& bytes);

void write_png(const std::filesystem::path& path, const ImageU8& img);

/// Raw float32 raster: magic "SPADFLX0", then u32 width/height/channels,
/// then row-major channel-interleaved float32 samples, all little-endian.
void write_flux_raster(const std::filesystem::path& path, const FluxMap& flux);
FluxMap read_flux_raster(const std::filesystem::path& path);

}  // namespace spadsim
