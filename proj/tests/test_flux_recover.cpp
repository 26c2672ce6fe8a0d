#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spadsim/flux_recover.hpp"
#include "spadsim/frame_synth.hpp"
#include "spadsim/photon_model.hpp"
#include "support.hpp"

using namespace spadsim;

TEST_CASE("count inversion is the exact inverse of the expected count") {
  for (double q : {0.3, 0.45, 1.0})
    for (double tau : {0.0, 1.5e-7, 1e-6})
      for (double T : {1e-6, 1e-5})
        for (int decade = 2; decade <= 9; ++decade) {
          SensorConfig cfg;
          cfg.q = q;
          cfg.tau_d = tau;
          cfg.T = T;
          cfg.phi_max = 1e12;
          const double phi = std::pow(10.0, decade);
          const double n = expected_count(phi, cfg);
          const double back = estimate_flux_from_count(n, cfg);
          CHECK(std::abs(back - phi) / phi < 1e-9);
        }
}

TEST_CASE("count inversion saturation boundary") {
  SensorConfig cfg;  // tau_d 1.5e-7, T 1e-5: budget hits zero at n = 200/3
  CHECK_THROWS_AS(estimate_flux_from_count(200.0 / 3.0, cfg), SaturationError);
  CHECK_THROWS_AS(estimate_flux_from_count(70.0, cfg), SaturationError);
  CHECK(estimate_flux_from_count(66.0, cfg) > 0.0);
  CHECK(estimate_flux_from_count(0.0, cfg) == 0.0);
  CHECK_THROWS_AS(estimate_flux_from_count(-1.0, cfg), InputError);
  CHECK_THROWS_AS(
      estimate_flux_from_count(std::numeric_limits<double>::quiet_NaN(), cfg),
      InputError);
  // without dead time no count saturates
  cfg.tau_d = 0.0;
  CHECK(estimate_flux_from_count(1e6, cfg) ==
        doctest::Approx(1e6 / (cfg.q * cfg.T)).epsilon(1e-12));
}

TEST_CASE("bit-rate estimator closed form") {
  SensorConfig cfg;
  BitStack stack;
  stack.width = 2;
  stack.height = 1;
  stack.channels = 1;
  stack.n_frames = 1000;
  stack.ones = {500, 0};
  const FluxEstimate est = estimate_flux_from_bits(stack, cfg);
  REQUIRE(est.flux.data.size() == 2);
  // p = 1/2 inverts to ln(2)/(qT); independent formulation of the same value
  CHECK(est.flux.data[0] ==
        doctest::Approx(std::log(2.0) / (cfg.q * cfg.T)).epsilon(1e-12));
  CHECK(est.flux.data[1] == 0.0);
  CHECK(est.saturated_count == 0);
  CHECK(est.flux.source_id == "recovered");
  CHECK(est.saturated[0] == 0);
}

TEST_CASE("saturated pixels are clamped and masked") {
  SensorConfig cfg;
  BitStack stack;
  stack.width = 2;
  stack.height = 1;
  stack.channels = 1;
  stack.n_frames = 100;
  stack.ones = {100, 42};
  const FluxEstimate est = estimate_flux_from_bits(stack, cfg);
  // clamp p to 1 - 1/(2n): estimate becomes ln(2n)/(qT)
  CHECK(est.flux.data[0] ==
        doctest::Approx(std::log(200.0) / (cfg.q * cfg.T)).epsilon(1e-12));
  CHECK(est.saturated[0] == 255);
  CHECK(est.saturated[1] == 0);
  CHECK(est.saturated_count == 1);
  CHECK(std::isfinite(est.flux.data[0]));
}

TEST_CASE("accumulation counts nonzero bytes and checks shapes") {
  BinaryFrame f;
  f.width = 2;
  f.height = 2;
  f.channels = 1;
  f.bits = {0, 255, 1, 0};  // any nonzero byte counts as a set bit
  BitStack stack;
  accumulate_frame(stack, f);
  accumulate_frame(stack, f);
  CHECK(stack.n_frames == 2);
  CHECK(stack.ones == std::vector<std::uint32_t>{0, 2, 2, 0});

  BinaryFrame other;
  other.width = 3;
  other.height = 2;
  other.channels = 1;
  other.bits.assign(6, 0);
  CHECK_THROWS_AS(accumulate_frame(stack, other), InputError);

  BinaryFrame empty;
  CHECK_THROWS_AS(accumulate_frame(stack, empty), InputError);
  CHECK_THROWS_AS(accumulate_bits({}), InputError);

  BitStack none;
  SensorConfig cfg;
  CHECK_THROWS_AS(estimate_flux_from_bits(none, cfg), InputError);
}

TEST_CASE("accumulate_bits equals manual folding over a burst") {
  SensorConfig cfg;
  FluxMap map;
  map.width = 4;
  map.height = 3;
  map.channels = 3;
  map.data.assign(static_cast<std::size_t>(4) * 3 * 3, 2e5);
  const auto frames = synthesize_burst(map, cfg, 7, 5);
  const BitStack batch = accumulate_bits(frames);
  BitStack manual;
  for (const auto& f : frames) accumulate_frame(manual, f);
  CHECK(batch.ones == manual.ones);
  CHECK(batch.n_frames == 5);
  CHECK(batch.channels == 3);
}

TEST_CASE("round trip: synthesize, accumulate, recover flux") {
  SensorConfig cfg;
  // choose flux so the per-frame bit probability is about one half
  const double phi = std::log(2.0) / (cfg.q * cfg.T);
  FluxMap map;
  map.width = 8;
  map.height = 8;
  map.channels = 1;
  map.data.assign(64, phi);
  constexpr unsigned kFrames = 1000;
  BitStack stack;
  for (unsigned f = 0; f < kFrames; ++f)
    accumulate_frame(stack, synthesize_binary_frame(map, cfg, 123, f));
  const FluxEstimate est = estimate_flux_from_bits(stack, cfg);
  CHECK(est.saturated_count == 0);
  double sum_rel = 0.0;
  double max_rel = 0.0;
  for (double v : est.flux.data) {
    const double rel = std::abs(v - phi) / phi;
    sum_rel += rel;
    max_rel = std::max(max_rel, rel);
  }
  // per pixel the 1-sigma relative error is about 4.6% at p = 1/2, n = 1000
  CHECK(max_rel < 0.25);
  const double mean_rel = sum_rel / 64.0;
  CHECK(mean_rel < 0.05);
  // the mean of the recovered field is tighter than any single pixel
  double mean_flux = 0.0;
  for (double v : est.flux.data) mean_flux += v;
  mean_flux /= 64.0;
  CHECK(std::abs(mean_flux - phi) / phi < 0.02);
}
