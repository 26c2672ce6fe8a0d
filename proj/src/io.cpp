#include "spadsim/io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <bit>
#include <cstring>
#include <fstream>

#include "spadsim/errors.hpp"
#include "spadsim/frame_synth.hpp"

static_assert(std::endian::native == std::endian::little,
              "flux raster I/O assumes a little-endian host");

namespace spadsim {

ImageU8 read_image_rgb(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec))
    throw InputError("image not found: " + path.string());
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (m.empty())
    throw InputError("cannot decode image: " + path.string());
  ImageU8 img = make_image(m.cols, m.rows, 3);
  for (int y = 0; y < m.rows; ++y) {
    const std::uint8_t* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) {
      // OpenCV decodes to BGR
      img.at(x, y, 0) = row[3 * x + 2];
      img.at(x, y, 1) = row[3 * x + 1];
      img.at(x, y, 2) = row[3 * x + 0];
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const ImageU8& img) {
  if (img.empty()) throw InputError("encode_png: empty image");
  cv::Mat m(img.height, img.width, img.channels == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < img.height; ++y) {
    std::uint8_t* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.width; ++x) {
      if (img.channels == 3) {
        row[3 * x + 0] = img.at(x, y, 2);
        row[3 * x + 1] = img.at(x, y, 1);
        row[3 * x + 2] = img.at(x, y, 0);
      } else {
        row[x] = img.at(x, y, 0);
      }
    }
  }
  std::vector<std::uint8_t> buf;
  const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 6};
  if (!cv::imencode(".png", m, buf, params))
    throw IoError("encode_png: encoder failed");
  return buf;
}

void write_bytes(const std::filesystem::path& path,
                 const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_png(const std::filesystem::path& path, const ImageU8& img) {
  write_bytes(path, encode_png(img));
}

static constexpr char kFluxMagic[8] = {'S', 'P', 'A', 'D',
                                       'F', 'L', 'X', '0'};

void write_flux_raster(const std::filesystem::path& path,
                       const FluxMap& flux) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kFluxMagic, 8);
  const std::uint32_t dims[3] = {static_cast<std::uint32_t>(flux.width),
                                 static_cast<std::uint32_t>(flux.height),
                                 static_cast<std::uint32_t>(flux.channels)};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  std::vector<float> f(flux.data.size());
  for (std::size_t i = 0; i < flux.data.size(); ++i)
    f[i] = static_cast<float>(flux.data[i]);
  out.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path.string());
}

FluxMap read_flux_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("flux raster not found: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kFluxMagic, 8) != 0)
    throw InputError("not a flux raster (bad magic): " + path.string());
  std::uint32_t dims[3];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in) throw InputError("truncated flux raster: " + path.string());
  if (dims[0] == 0 || dims[1] == 0 || (dims[2] != 1 && dims[2] != 3))
    throw InputError("flux raster has bad dimensions: " + path.string());
  FluxMap flux;
  flux.width = static_cast<int>(dims[0]);
  flux.height = static_cast<int>(dims[1]);
  flux.channels = static_cast<int>(dims[2]);
  const std::size_t n =
      static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  std::vector<float> f(n);
  in.read(reinterpret_cast<char*>(f.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw InputError("truncated flux raster: " + path.string());
  flux.data.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    flux.data[i] = static_cast<double>(f[i]);
  flux.source_id = path.filename().string();
  return flux;
}

}  // namespace spadsim
