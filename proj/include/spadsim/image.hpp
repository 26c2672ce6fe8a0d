#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spadsim/errors.hpp"

namespace spadsim {

/// 8-bit raster, row-major, channel-interleaved. channels is 1 or 3; 3-channel
/// data is RGB regardless of what the codec used on disk.
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t at(int x, int y, int c) const { return data[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c) { return data[index(x, y, c)]; }

  bool same_shape(const ImageU8& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

inline ImageU8 make_image(int width, int height, int channels,
                          std::uint8_t fill = 0) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
    throw InputError("make_image: bad dimensions");
  ImageU8 img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.data.assign(
      static_cast<std::size_t>(width) * height * channels, fill);
  return img;
}

}  // namespace spadsim
