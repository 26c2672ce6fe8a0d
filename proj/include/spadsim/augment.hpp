#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spadsim/image.hpp"

namespace spadsim {

/// One affine augmentation: output = flip(shear(rotate(zoom(input)))),
/// all about the image center. rotation is counterclockwise degrees in the
/// usual x-right / y-up convention (visually clockwise with y-down rasters).
struct AugmentSpec {
  double zoom = 1.0;
  double rotation = 0.0;  // degrees
  double shear_x = 0.0;
  double shear_y = 0.0;
  bool flip_h = false;
  bool flip_v = false;
  std::string spec_id;
};

struct AugmentRanges {
  double zoom_min = 0.8;
  double zoom_max = 1.3;
  double rotation_min = -25.0;
  double rotation_max = 25.0;
  double shear_min = -0.2;
  double shear_max = 0.2;

  void validate() const;  // throws ConfigError
  bool contains(const AugmentSpec& spec) const;
};

/// Inverse-mapped affine warp with bilinear interpolation and symmetric
/// reflect padding. Output has the input's dimensions. The identity spec is
/// byte-exact, as are pure flips and rotations by multiples of 90 degrees
/// on square images (the trig is snapped so lattice points map to lattice
/// points exactly).
ImageU8 apply_affine(const ImageU8& image, const AugmentSpec& spec);

/// count specs drawn independently per index from counter-based streams:
/// element i depends only on (seed, i, ranges), so lists are prefix-stable.
/// Draw order per spec: zoom, rotation, shear_x, shear_y, flip_h, flip_v,
/// each uniform over its range (flips are fair coins). spec_id = "spec_"
/// + zero-padded index.
std::vector<AugmentSpec> sample_augment_specs(std::uint64_t seed,
                                              std::size_t count,
                                              const AugmentRanges& ranges = {});

/// Reflect an arbitrary integer index into [0, n): ...321 0123 3210 012...
int reflect_index(long long i, int n);

void to_json(nlohmann::json& j, const AugmentSpec& spec);
void from_json(const nlohmann::json& j, AugmentSpec& spec);
void to_json(nlohmann::json& j, const AugmentRanges& r);
void from_json(const nlohmann::json& j, AugmentRanges& r);

}  // namespace spadsim
