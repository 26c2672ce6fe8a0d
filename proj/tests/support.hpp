#pragma once

// Shared helpers for the test binaries. The renewal oracle here is an
// independent derivation (Poisson tail identity), kept deliberately separate
// from the library's closed forms so the two can disagree.

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "spadsim/image.hpp"

namespace testsupport {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    path_ = base / (tag + "_" + std::to_string(rd()) + "_" +
                    std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline spadsim::ImageU8 constant_image(int w, int h, std::uint8_t v,
                                       int channels = 3) {
  return spadsim::make_image(w, h, channels, v);
}

inline spadsim::ImageU8 gradient_image(int w, int h) {
  spadsim::ImageU8 img = spadsim::make_image(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>((x * 255) / (w - 1));
      img.at(x, y, 1) = static_cast<std::uint8_t>((y * 255) / (h - 1));
      img.at(x, y, 2) = static_cast<std::uint8_t>(((x + y) * 255) /
                                                  (w + h - 2));
    }
  return img;
}

inline spadsim::ImageU8 random_image(int w, int h, std::uint32_t seed,
                                     int channels = 3) {
  spadsim::ImageU8 img = spadsim::make_image(w, h, channels);
  std::mt19937 gen(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(dist(gen));
  return img;
}

struct RunningStats {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const {
    return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  }
};

// P(K >= n) for K ~ Poisson(m), computed in log space. Absolute error is
// what matters downstream; ~1e-14 here.
inline double poisson_sf(int n, double m) {
  if (n <= 0) return 1.0;
  if (m <= 0.0) return 0.0;
  const double lgm = std::log(m);
  if (static_cast<double>(n) - 1.0 < m) {
    // complement over k = 0..n-1
    double lmax = -std::numeric_limits<double>::infinity();
    std::vector<double> lt(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      lt[k] = k * lgm - m - std::lgamma(static_cast<double>(k) + 1.0);
      lmax = std::max(lmax, lt[k]);
    }
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += std::exp(lt[k] - lmax);
    const double cdf = std::exp(lmax) * acc;
    return 1.0 - cdf;
  }
  // direct tail from k = n upward; terms decay since k >= m
  double lt = n * lgm - m - std::lgamma(static_cast<double>(n) + 1.0);
  double term = std::exp(lt);
  double acc = 0.0;
  for (int k = n; k < n + 200000; ++k) {
    acc += term;
    term *= m / (static_cast<double>(k) + 1.0);
    if (term < acc * 1e-18 + 1e-300) break;
  }
  return acc;
}

// Exact dead-time renewal moments. With detections at rate lam and fixed
// blind time tau after each, the n-th detection lands inside [0, T] iff a
// Poisson(lam * (T - (n-1)tau)) variable reaches n: conditioned on the
// dead time spent, the remaining budget must hold n exponential gaps, and
// Gamma(n, lam) <= t equals Poisson(lam t) >= n. Summing tail probabilities
// gives E[N] and E[N^2].
struct RenewalMoments {
  double mean = 0.0;
  double variance = 0.0;
};

inline RenewalMoments renewal_exact(double lam, double tau, double T) {
  RenewalMoments out;
  if (lam <= 0.0) return out;
  const double asymptotic_mean = lam * T / (1.0 + lam * tau);
  double e = 0.0, e2 = 0.0;
  for (int n = 1;; ++n) {
    const double budget = T - (static_cast<double>(n) - 1.0) * tau;
    if (budget <= 0.0) break;
    const double sf = poisson_sf(n, lam * budget);
    e += sf;
    e2 += (2.0 * n - 1.0) * sf;
    if (sf < 1e-15 && static_cast<double>(n) > asymptotic_mean) break;
    if (n > 1000000) break;
  }
  out.mean = e;
  out.variance = e2 - e * e;
  return out;
}

}  // namespace testsupport
