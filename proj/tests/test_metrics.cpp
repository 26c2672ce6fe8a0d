#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "spadsim/io.hpp"
#include "spadsim/metrics.hpp"
#include "support.hpp"

using namespace spadsim;
using testsupport::TempDir;

// Independent oracles: direct textbook formulas, no shared code with the
// library (which uses separable convolution internally).

static double psnr_naive(const ImageU8& a, const ImageU8& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d =
        static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

static double ssim_naive(const ImageU8& a, const ImageU8& b) {
  constexpr int W = 11, R = 5;
  constexpr double C1 = 6.5025, C2 = 58.5225;  // (K*L)^2 for K1=.01, K2=.03
  double k[W][W];
  double ksum = 0.0;
  for (int i = 0; i < W; ++i)
    for (int j = 0; j < W; ++j) {
      const double di = i - R, dj = j - R;
      k[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * 1.5 * 1.5));
      ksum += k[i][j];
    }
  for (int i = 0; i < W; ++i)
    for (int j = 0; j < W; ++j) k[i][j] /= ksum;
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    double acc = 0.0;
    std::size_t windows = 0;
    for (int y0 = 0; y0 + W <= a.height; ++y0)
      for (int x0 = 0; x0 + W <= a.width; ++x0) {
        double mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
        for (int i = 0; i < W; ++i)
          for (int j = 0; j < W; ++j) {
            const double va = a.at(x0 + j, y0 + i, c);
            const double vb = b.at(x0 + j, y0 + i, c);
            mx += k[i][j] * va;
            my += k[i][j] * vb;
            exx += k[i][j] * va * va;
            eyy += k[i][j] * vb * vb;
            exy += k[i][j] * va * vb;
          }
        const double vx = exx - mx * mx;
        const double vy = eyy - my * my;
        const double cov = exy - mx * my;
        acc += ((2 * mx * my + C1) * (2 * cov + C2)) /
               ((mx * mx + my * my + C1) * (vx + vy + C2));
        ++windows;
      }
    total += acc / static_cast<double>(windows);
  }
  return total / a.channels;
}

TEST_CASE("psnr pinned values") {
  const ImageU8 a = testsupport::random_image(16, 16, 5);
  CHECK(std::isinf(psnr(a, a)));
  // uniform +1 shift: mse = 1, psnr = 20*log10(255)
  const ImageU8 base = testsupport::constant_image(16, 16, 100);
  const ImageU8 shifted = testsupport::constant_image(16, 16, 101);
  CHECK(psnr(base, shifted) ==
        doctest::Approx(48.130803608679103).epsilon(1e-12));
  // full-scale error: mse = 255^2, psnr = 0 exactly
  const ImageU8 black = testsupport::constant_image(8, 8, 0);
  const ImageU8 white = testsupport::constant_image(8, 8, 255);
  CHECK(psnr(black, white) == 0.0);
}

TEST_CASE("psnr and ssim agree with naive oracles") {
  for (std::uint32_t seed : {1u, 2u, 3u}) {
    const ImageU8 a = testsupport::random_image(32, 32, seed);
    ImageU8 b = a;
    // correlated distortion: flip some pixels, shift others
    for (std::size_t i = 0; i < b.data.size(); i += 7)
      b.data[i] = static_cast<std::uint8_t>(255 - b.data[i]);
    for (std::size_t i = 3; i < b.data.size(); i += 11)
      b.data[i] = static_cast<std::uint8_t>((b.data[i] + 40) % 256);
    CHECK(std::abs(psnr(a, b) - psnr_naive(a, b)) < 1e-9);
    CHECK(std::abs(ssim(a, b) - ssim_naive(a, b)) < 1e-9);
  }
  const ImageU8 g = testsupport::gradient_image(24, 24);
  const ImageU8 r = testsupport::random_image(24, 24, 9);
  CHECK(std::abs(ssim(g, r) - ssim_naive(g, r)) < 1e-9);
}

TEST_CASE("ssim pinned properties") {
  const ImageU8 a = testsupport::gradient_image(32, 32);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  ImageU8 inverted = a;
  for (auto& v : inverted.data) v = static_cast<std::uint8_t>(255 - v);
  CHECK(ssim(a, inverted) < 0.2);  // anticorrelated structure scores low
  // ssim is symmetric
  const ImageU8 b = testsupport::random_image(32, 32, 4);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
}

TEST_CASE("metrics reject malformed pairs") {
  const ImageU8 a = testsupport::random_image(16, 16, 1);
  const ImageU8 b = testsupport::random_image(17, 16, 1);
  CHECK_THROWS_AS(psnr(a, b), InputError);
  CHECK_THROWS_AS(ssim(a, b), InputError);
  const ImageU8 tiny = testsupport::random_image(10, 10, 1);
  CHECK_THROWS_AS(ssim(tiny, tiny), InputError);
  CHECK(std::isinf(psnr(tiny, tiny)));  // psnr has no window constraint
}

TEST_CASE("csv format is pinned") {
  MetricsReport report;
  MetricsRow r1;
  r1.image_id = "img_a";
  r1.psnr_db = std::numeric_limits<double>::infinity();
  r1.ssim_val = 1.0;
  MetricsRow r2;
  r2.image_id = "img_b";
  r2.psnr_db = 23.4567891;
  r2.ssim_val = 0.8765432;
  r2.lpips = 0.123456789;
  MetricsRow r3;
  r3.image_id = "img_c";
  r3.error = "shape mismatch";
  report.rows = {r1, r2, r3};
  const std::string csv = metrics_csv(report);
  CHECK(csv ==
        "image_id,psnr_db,ssim,lpips\n"
        "img_a,inf,1.000000,n/a\n"
        "img_b,23.456789,0.876543,0.123457\n"
        "img_c,nan,nan,n/a\n");
  CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("directory evaluation pairs by stem") {
  TempDir tmp("metrics");
  const auto ref = tmp.path() / "ref";
  const auto test = tmp.path() / "test";
  std::filesystem::create_directories(ref);
  std::filesystem::create_directories(test);
  const ImageU8 a = testsupport::gradient_image(24, 24);
  ImageU8 b = a;
  for (auto& v : b.data) v = static_cast<std::uint8_t>(v / 2);
  write_png(ref / "one.png", a);
  write_png(test / "one.png", a);  // identical -> inf psnr
  write_png(ref / "two.png", a);
  write_png(test / "two.png", b);
  write_png(ref / "only_ref.png", a);
  write_png(test / "only_test.png", b);

  const MetricsReport report = evaluate_dirs(ref, test, 2);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].image_id == "one");
  CHECK(report.rows[1].image_id == "two");
  CHECK(std::isinf(report.rows[0].psnr_db));
  CHECK(report.rows[0].ssim_val == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.rows[1].psnr_db > 0.0);
  CHECK(report.rows[1].psnr_db < 60.0);
  CHECK(report.scored == 2);
  CHECK(report.infinite_psnr == 1);
  REQUIRE(report.unmatched_ref.size() == 1);
  CHECK(report.unmatched_ref[0] == "only_ref");
  REQUIRE(report.unmatched_test.size() == 1);
  CHECK(report.unmatched_test[0] == "only_test");
  // deterministic across jobs
  const MetricsReport again = evaluate_dirs(ref, test, 1);
  CHECK(metrics_csv(again) == metrics_csv(report));
  // table renders without a timestamp when asked
  const std::string table = metrics_table(report, false);
  CHECK(table.find("evaluated at") == std::string::npos);
  CHECK(table.find("one") != std::string::npos);
  CHECK(table.find("unmatched in ref: only_ref") != std::string::npos);
}

TEST_CASE("shape mismatch lands in the row error, not an exception") {
  TempDir tmp("metrics_shape");
  const auto ref = tmp.path() / "ref";
  const auto test = tmp.path() / "test";
  std::filesystem::create_directories(ref);
  std::filesystem::create_directories(test);
  write_png(ref / "a.png", testsupport::gradient_image(24, 24));
  write_png(test / "a.png", testsupport::gradient_image(32, 24));
  const MetricsReport report = evaluate_dirs(ref, test, 1);
  REQUIRE(report.rows.size() == 1);
  CHECK(!report.rows[0].error.empty());
  CHECK(report.scored == 0);
  const std::string csv = metrics_csv(report);
  CHECK(csv.find("a,nan,nan,n/a") != std::string::npos);
}

TEST_CASE("evaluation errors on missing dirs and empty intersections") {
  TempDir tmp("metrics_err");
  const auto ref = tmp.path() / "ref";
  std::filesystem::create_directories(ref);
  write_png(ref / "x.png", testsupport::gradient_image(16, 16));
  CHECK_THROWS_AS(evaluate_dirs(ref, tmp.path() / "nope", 1), InputError);
  const auto test = tmp.path() / "test";
  std::filesystem::create_directories(test);
  write_png(test / "y.png", testsupport::gradient_image(16, 16));
  CHECK_THROWS_AS(evaluate_dirs(ref, test, 1), InputError);
}

TEST_CASE("lpips merge by image id") {
  TempDir tmp("lpips");
  MetricsReport report;
  MetricsRow r1;
  r1.image_id = "one";
  MetricsRow r2;
  r2.image_id = "two";
  report.rows = {r1, r2};
  {
    std::ofstream csv(tmp.path() / "lpips.csv");
    csv << "image_id,lpips\none,0.25\nthree,0.5\n";
  }
  const std::size_t merged = merge_lpips_csv(report, tmp.path() / "lpips.csv");
  CHECK(merged == 1);
  REQUIRE(report.rows[0].lpips.has_value());
  CHECK(*report.rows[0].lpips == doctest::Approx(0.25));
  CHECK(!report.rows[1].lpips.has_value());
  CHECK(metrics_csv(report).find("one,0.000000,0.000000,0.250000") !=
        std::string::npos);
  {
    std::ofstream csv(tmp.path() / "bad.csv");
    csv << "one,not_a_number\n";
  }
  CHECK_THROWS_AS(merge_lpips_csv(report, tmp.path() / "bad.csv"),
                  InputError);
  CHECK_THROWS_AS(merge_lpips_csv(report, tmp.path() / "missing.csv"),
                  InputError);
}
