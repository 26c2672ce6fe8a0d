#include "spadsim/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "spadsim/errors.hpp"
#include "spadsim/io.hpp"
#include "spadsim/parallel.hpp"

namespace spadsim {

static void check_pair(const ImageU8& a, const ImageU8& b) {
  if (a.empty() || b.empty()) throw InputError("metrics: empty image");
  if (!a.same_shape(b))
    throw InputError("metrics: image shapes differ (" +
                     std::to_string(a.width) + "x" + std::to_string(a.height) +
                     "x" + std::to_string(a.channels) + " vs " +
                     std::to_string(b.width) + "x" + std::to_string(b.height) +
                     "x" + std::to_string(b.channels) + ")");
}

double psnr(const ImageU8& a, const ImageU8& b) {
  check_pair(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const int d = static_cast<int>(a.data[i]) - static_cast<int>(b.data[i]);
    sum += static_cast<double>(d) * d;
  }
  const double mse = sum / static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace {

constexpr int kWin = 11;
constexpr int kRadius = kWin / 2;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

const double* gaussian_kernel() {
  static double k[kWin];
  static const bool init = [] {
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
      const double d = i - kRadius;
      k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
      sum += k[i];
    }
    for (int i = 0; i < kWin; ++i) k[i] /= sum;
    return true;
  }();
  (void)init;
  return k;
}

// Horizontal then vertical pass; output is the valid region only.
void convolve_valid(const std::vector<double>& src, int w, int h,
                    std::vector<double>& tmp, std::vector<double>& dst) {
  const double* k = gaussian_kernel();
  const int vw = w - kWin + 1;
  const int vh = h - kWin + 1;
  tmp.assign(static_cast<std::size_t>(vw) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWin; ++i)
        acc += k[i] * src[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * vw + x] = acc;
    }
  dst.assign(static_cast<std::size_t>(vw) * vh, 0.0);
  for (int y = 0; y < vh; ++y)
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWin; ++i)
        acc += k[i] * tmp[static_cast<std::size_t>(y + i) * vw + x];
      dst[static_cast<std::size_t>(y) * vw + x] = acc;
    }
}

}  // namespace

double ssim(const ImageU8& a, const ImageU8& b) {
  check_pair(a, b);
  if (a.width < kWin || a.height < kWin)
    throw InputError("ssim: images must be at least 11x11");
  const int w = a.width, h = a.height;
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  std::vector<double> xs(plane), ys(plane), xx(plane), yy(plane), xy(plane);
  std::vector<double> tmp, mu_x, mu_y, e_xx, e_yy, e_xy;
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const double va = a.at(x, y, c);
        const double vb = b.at(x, y, c);
        xs[i] = va;
        ys[i] = vb;
        xx[i] = va * va;
        yy[i] = vb * vb;
        xy[i] = va * vb;
      }
    convolve_valid(xs, w, h, tmp, mu_x);
    convolve_valid(ys, w, h, tmp, mu_y);
    convolve_valid(xx, w, h, tmp, e_xx);
    convolve_valid(yy, w, h, tmp, e_yy);
    convolve_valid(xy, w, h, tmp, e_xy);
    double acc = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
      const double mx = mu_x[i], my = mu_y[i];
      const double vx = e_xx[i] - mx * mx;
      const double vy = e_yy[i] - my * my;
      const double cov = e_xy[i] - mx * my;
      const double num = (2.0 * mx * my + kC1) * (2.0 * cov + kC2);
      const double den = (mx * mx + my * my + kC1) * (vx + vy + kC2);
      acc += num / den;
    }
    total += acc / static_cast<double>(mu_x.size());
  }
  return total / a.channels;
}

static bool image_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return e == ".png" || e == ".jpg" || e == ".jpeg";
}

static std::map<std::string, std::filesystem::path> scan_dir(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw InputError("not a directory: " + dir.string());
  std::map<std::string, std::filesystem::path> stems;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !image_ext(entry.path())) continue;
    stems[entry.path().stem().string()] = entry.path();
  }
  return stems;
}

MetricsReport evaluate_dirs(const std::filesystem::path& ref_dir,
                            const std::filesystem::path& test_dir, int jobs) {
  const auto ref = scan_dir(ref_dir);
  const auto test = scan_dir(test_dir);
  MetricsReport report;
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> pairs;
  for (const auto& [stem, path] : ref) {
    auto it = test.find(stem);
    if (it == test.end()) {
      report.unmatched_ref.push_back(stem);
      continue;
    }
    MetricsRow row;
    row.image_id = stem;
    report.rows.push_back(std::move(row));
    pairs.emplace_back(path, it->second);
  }
  for (const auto& [stem, path] : test)
    if (!ref.count(stem)) report.unmatched_test.push_back(stem);
  if (report.rows.empty())
    throw InputError("no matching image stems between " + ref_dir.string() +
                     " and " + test_dir.string());
  parallel_for(report.rows.size(), jobs, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      MetricsRow& row = report.rows[i];
      try {
        const ImageU8 ia = read_image_rgb(pairs[i].first);
        const ImageU8 ib = read_image_rgb(pairs[i].second);
        row.psnr_db = psnr(ia, ib);
        row.ssim_val = ssim(ia, ib);
      } catch (const Error& err) {
        row.error = err.what();
      }
    }
  });
  double psnr_sum = 0.0, ssim_sum = 0.0;
  std::size_t finite = 0;
  for (const auto& row : report.rows) {
    if (!row.error.empty()) continue;
    ++report.scored;
    ssim_sum += row.ssim_val;
    if (std::isinf(row.psnr_db)) {
      ++report.infinite_psnr;
    } else {
      psnr_sum += row.psnr_db;
      ++finite;
    }
  }
  report.mean_psnr_db = finite ? psnr_sum / static_cast<double>(finite) : 0.0;
  report.mean_ssim =
      report.scored ? ssim_sum / static_cast<double>(report.scored) : 0.0;
  return report;
}

std::size_t merge_lpips_csv(MetricsReport& report,
                            const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw InputError("cannot open lpips csv: " + csv.string());
  std::map<std::string, double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    const std::string id = line.substr(0, comma);
    if (id == "image_id") continue;  // header
    try {
      values[id] = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw InputError("lpips csv: bad value on line '" + line + "'");
    }
  }
  std::size_t merged = 0;
  for (auto& row : report.rows) {
    auto it = values.find(row.image_id);
    if (it != values.end()) {
      row.lpips = it->second;
      ++merged;
    }
  }
  return merged;
}

static std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string metrics_csv(const MetricsReport& report) {
  std::string out = "image_id,psnr_db,ssim,lpips\n";
  for (const auto& row : report.rows) {
    out += row.image_id;
    out += ',';
    if (!row.error.empty())
      out += "nan,nan";
    else if (std::isinf(row.psnr_db))
      out += "inf," + fmt6(row.ssim_val);
    else
      out += fmt6(row.psnr_db) + "," + fmt6(row.ssim_val);
    out += ',';
    out += row.lpips ? fmt6(*row.lpips) : "n/a";
    out += '\n';
  }
  return out;
}

void write_metrics_csv(const MetricsReport& report,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << metrics_csv(report);
  if (!out) throw IoError("write failed: " + path.string());
}

std::string metrics_table(const MetricsReport& report, bool timestamp) {
  std::ostringstream out;
  if (timestamp) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%d %H:%M:%S", std::gmtime(&t));
    out << "evaluated at " << buf << " UTC\n";
  }
  std::size_t idw = 8;
  for (const auto& row : report.rows) idw = std::max(idw, row.image_id.size());
  out << std::string(idw - 8, ' ') << "image_id   psnr_db     ssim    lpips\n";
  for (const auto& row : report.rows) {
    out << std::string(idw - row.image_id.size(), ' ') << row.image_id;
    if (!row.error.empty()) {
      out << "   error: " << row.error << "\n";
      continue;
    }
    char buf[96];
    if (std::isinf(row.psnr_db))
      std::snprintf(buf, sizeof(buf), "       inf %8.4f", row.ssim_val);
    else
      std::snprintf(buf, sizeof(buf), "%10.4f %8.4f", row.psnr_db,
                    row.ssim_val);
    out << buf;
    if (row.lpips)
      std::snprintf(buf, sizeof(buf), " %8.4f", *row.lpips);
    else
      std::snprintf(buf, sizeof(buf), "      n/a");
    out << buf << "\n";
  }
  out << "scored " << report.scored << " pair(s)";
  if (report.infinite_psnr)
    out << " (" << report.infinite_psnr << " with infinite psnr)";
  out << "; mean psnr " << fmt6(report.mean_psnr_db) << " dB, mean ssim "
      << fmt6(report.mean_ssim) << "\n";
  if (!report.unmatched_ref.empty()) {
    out << "unmatched in ref:";
    for (const auto& s : report.unmatched_ref) out << " " << s;
    out << "\n";
  }
  if (!report.unmatched_test.empty()) {
    out << "unmatched in test:";
    for (const auto& s : report.unmatched_test) out << " " << s;
    out << "\n";
  }
  return out.str();
}

}  // namespace spadsim
