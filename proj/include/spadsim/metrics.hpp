#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spadsim/image.hpp"

namespace spadsim {

/// Peak signal-to-noise ratio in dB over all pixels and channels, peak 255.
/// Identical images return +infinity. Throws InputError on shape mismatch.
double psnr(const ImageU8& a, const ImageU8& b);

/// Mean structural similarity: 11x11 Gaussian window (sigma 1.5), K1=0.01,
/// K2=0.03, L=255, computed per channel over valid window positions only
/// (no padding) and averaged across channels. Images must be at least 11x11.
double ssim(const ImageU8& a, const ImageU8& b);

struct MetricsRow {
  std::string image_id;  // shared stem
  double psnr_db = 0.0;  // +inf encoded as infinity
  double ssim_val = 0.0;
  std::optional<double> lpips;  // merged from an external tool, if any
  std::string error;            // nonempty if the pair could not be scored
};

struct MetricsReport {
  std::vector<MetricsRow> rows;  // sorted by image_id
  std::vector<std::string> unmatched_ref;
  std::vector<std::string> unmatched_test;
  std::size_t scored = 0;
  std::size_t infinite_psnr = 0;
  double mean_psnr_db = 0.0;  // over finite-psnr scored rows
  double mean_ssim = 0.0;     // over scored rows
};

/// Pairs files by stem (png/jpg/jpeg, case-insensitive, non-recursive) and
/// scores each pair. Throws InputError if a directory is missing or no stems
/// match at all.
MetricsReport evaluate_dirs(const std::filesystem::path& ref_dir,
                            const std::filesystem::path& test_dir,
                            int jobs = 1);

/// Merges per-image LPIPS values from a CSV with columns image_id,lpips
/// (header optional). Unknown ids are ignored; returns how many rows
/// matched.
std::size_t merge_lpips_csv(MetricsReport& report,
                            const std::filesystem::path& csv);

/// CSV with header image_id,psnr_db,ssim,lpips; UTF-8, LF line endings,
/// six decimal places, "inf" for infinite PSNR, "n/a" for absent LPIPS.
/// Unscorable rows carry "nan" in both metric columns. No timestamps: the
/// same inputs must produce byte-identical CSVs.
std::string metrics_csv(const MetricsReport& report);
void write_metrics_csv(const MetricsReport& report,
                       const std::filesystem::path& path);

/// Human-readable table for the console (this one may carry a timestamp).
std::string metrics_table(const MetricsReport& report, bool timestamp = true);

}  // namespace spadsim
