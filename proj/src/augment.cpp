#include "spadsim/augment.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include <nlohmann/json.hpp>

#include "spadsim/errors.hpp"
#include "spadsim/rng.hpp"

namespace spadsim {

void AugmentRanges::validate() const {
  std::string bad;
  auto flag = [&bad](const char* msg) {
    if (!bad.empty()) bad += "; ";
    bad += msg;
  };
  auto ordered = [](double lo, double hi) {
    return std::isfinite(lo) && std::isfinite(hi) && lo <= hi;
  };
  if (!ordered(zoom_min, zoom_max) || zoom_min <= 0.0)
    flag("zoom range must satisfy 0 < min <= max");
  if (!ordered(rotation_min, rotation_max))
    flag("rotation range must satisfy min <= max");
  if (!ordered(shear_min, shear_max))
    flag("shear range must satisfy min <= max");
  if (!bad.empty()) throw ConfigError("invalid augment ranges: " + bad);
}

bool AugmentRanges::contains(const AugmentSpec& s) const {
  return s.zoom >= zoom_min && s.zoom <= zoom_max &&
         s.rotation >= rotation_min && s.rotation <= rotation_max &&
         s.shear_x >= shear_min && s.shear_x <= shear_max &&
         s.shear_y >= shear_min && s.shear_y <= shear_max;
}

// Snap the right angles so 90-degree multiples move lattice points to
// lattice points with no rounding residue; that is what makes rot90 on a
// square image byte-exact.
static void rotation_sincos(double deg, double& s, double& c) {
  double r = std::fmod(deg, 360.0);
  if (r < 0) r += 360.0;
  if (r == 0.0) { c = 1.0; s = 0.0; return; }
  if (r == 90.0) { c = 0.0; s = 1.0; return; }
  if (r == 180.0) { c = -1.0; s = 0.0; return; }
  if (r == 270.0) { c = 0.0; s = -1.0; return; }
  const double rad = r * std::numbers::pi / 180.0;
  c = std::cos(rad);
  s = std::sin(rad);
}

int reflect_index(long long i, int n) {
  if (n <= 0) throw InputError("reflect_index: n must be positive");
  if (n == 1) return 0;
  const long long period = 2LL * n;
  long long m = i % period;
  if (m < 0) m += period;
  return static_cast<int>(m < n ? m : period - 1 - m);
}

static void validate_spec(const AugmentSpec& s) {
  if (!(std::isfinite(s.zoom) && s.zoom > 0.0))
    throw InputError("augment spec: zoom must be finite and > 0");
  if (!std::isfinite(s.rotation))
    throw InputError("augment spec: rotation must be finite");
  if (!(std::isfinite(s.shear_x) && std::isfinite(s.shear_y)))
    throw InputError("augment spec: shear must be finite");
}

ImageU8 apply_affine(const ImageU8& image, const AugmentSpec& spec) {
  if (image.empty()) throw InputError("apply_affine: empty image");
  validate_spec(spec);

  double sn, cs;
  rotation_sincos(spec.rotation, sn, cs);
  const double z = spec.zoom;
  // forward = F * Sh * R * Z (rightmost acts first on content points)
  const double fh = spec.flip_h ? -1.0 : 1.0;
  const double fv = spec.flip_v ? -1.0 : 1.0;
  // Sh * R
  const double m00 = cs + spec.shear_x * sn;
  const double m01 = -sn + spec.shear_x * cs;
  const double m10 = spec.shear_y * cs + sn;
  const double m11 = -spec.shear_y * sn + cs;
  // F * (Sh * R) * Z
  const double a00 = fh * m00 * z;
  const double a01 = fh * m01 * z;
  const double a10 = fv * m10 * z;
  const double a11 = fv * m11 * z;
  const double det = a00 * a11 - a01 * a10;
  if (std::abs(det) < 1e-12)
    throw InputError("augment spec: transform is singular");
  const double i00 = a11 / det;
  const double i01 = -a01 / det;
  const double i10 = -a10 / det;
  const double i11 = a00 / det;

  const int w = image.width, h = image.height, ch = image.channels;
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  ImageU8 out = make_image(w, h, ch);
  for (int y = 0; y < h; ++y) {
    const double dy = y - cy;
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx;
      const double sx = i00 * dx + i01 * dy + cx;
      const double sy = i10 * dx + i11 * dy + cy;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const double wx = sx - fx;
      const double wy = sy - fy;
      const int x0 = reflect_index(static_cast<long long>(fx), w);
      const int x1 = reflect_index(static_cast<long long>(fx) + 1, w);
      const int y0 = reflect_index(static_cast<long long>(fy), h);
      const int y1 = reflect_index(static_cast<long long>(fy) + 1, h);
      for (int c = 0; c < ch; ++c) {
        const double p00 = image.at(x0, y0, c);
        const double p01 = image.at(x1, y0, c);
        const double p10 = image.at(x0, y1, c);
        const double p11 = image.at(x1, y1, c);
        const double v = (1.0 - wy) * ((1.0 - wx) * p00 + wx * p01) +
                         wy * ((1.0 - wx) * p10 + wx * p11);
        out.at(x, y, c) = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  return out;
}

std::vector<AugmentSpec> sample_augment_specs(std::uint64_t seed,
                                              std::size_t count,
                                              const AugmentRanges& ranges) {
  ranges.validate();
  std::vector<AugmentSpec> specs;
  specs.reserve(count);
  auto in_range = [](Stream& st, double lo, double hi) {
    return lo + st.uniform01() * (hi - lo);
  };
  for (std::size_t i = 0; i < count; ++i) {
    Stream st = derive_task_stream(seed, kTaskTagAugment, i);
    AugmentSpec s;
    s.zoom = in_range(st, ranges.zoom_min, ranges.zoom_max);
    s.rotation = in_range(st, ranges.rotation_min, ranges.rotation_max);
    s.shear_x = in_range(st, ranges.shear_min, ranges.shear_max);
    s.shear_y = in_range(st, ranges.shear_min, ranges.shear_max);
    s.flip_h = st.uniform01() < 0.5;
    s.flip_v = st.uniform01() < 0.5;
    char id[32];
    std::snprintf(id, sizeof(id), "spec_%06zu", i);
    s.spec_id = id;
    specs.push_back(std::move(s));
  }
  return specs;
}

void to_json(nlohmann::json& j, const AugmentSpec& s) {
  j = nlohmann::json{{"flip_h", s.flip_h},     {"flip_v", s.flip_v},
                     {"rotation", s.rotation}, {"shear_x", s.shear_x},
                     {"shear_y", s.shear_y},   {"spec_id", s.spec_id},
                     {"zoom", s.zoom}};
}

void from_json(const nlohmann::json& j, AugmentSpec& s) {
  try {
    j.at("zoom").get_to(s.zoom);
    j.at("rotation").get_to(s.rotation);
    j.at("shear_x").get_to(s.shear_x);
    j.at("shear_y").get_to(s.shear_y);
    j.at("flip_h").get_to(s.flip_h);
    j.at("flip_v").get_to(s.flip_v);
    j.at("spec_id").get_to(s.spec_id);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("augment spec json: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const AugmentRanges& r) {
  j = nlohmann::json{{"rotation_max", r.rotation_max},
                     {"rotation_min", r.rotation_min},
                     {"shear_max", r.shear_max},
                     {"shear_min", r.shear_min},
                     {"zoom_max", r.zoom_max},
                     {"zoom_min", r.zoom_min}};
}

void from_json(const nlohmann::json& j, AugmentRanges& r) {
  try {
    j.at("zoom_min").get_to(r.zoom_min);
    j.at("zoom_max").get_to(r.zoom_max);
    j.at("rotation_min").get_to(r.rotation_min);
    j.at("rotation_max").get_to(r.rotation_max);
    j.at("shear_min").get_to(r.shear_min);
    j.at("shear_max").get_to(r.shear_max);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("augment ranges json: ") + e.what());
  }
}

}  // namespace spadsim
