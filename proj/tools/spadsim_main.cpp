// spadsim: single-photon camera simulation and dataset toolkit.
//
// Exit codes: 0 success, 1 internal error, 2 input/usage error,
// 3 configuration error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spadsim/dataset.hpp"
#include "spadsim/errors.hpp"
#include "spadsim/flux_recover.hpp"
#include "spadsim/frame_synth.hpp"
#include "spadsim/hash.hpp"
#include "spadsim/io.hpp"
#include "spadsim/metrics.hpp"
#include "spadsim/sampler.hpp"
#include "spadsim/sensor_config.hpp"
#include "spadsim/version.hpp"

namespace fs = std::filesystem;
using namespace spadsim;

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SensorCli {
  SensorConfig cfg;

  void attach(CLI::App* cmd) {
    cmd->add_option("--q", cfg.q, "Detection probability per incident photon")
        ->capture_default_str();
    cmd->add_option("--tau-d", cfg.tau_d, "Dead time after a detection [s]")
        ->capture_default_str();
    cmd->add_option("--exposure", cfg.T, "Exposure time per frame [s]")
        ->capture_default_str();
    cmd->add_option("--phi-max", cfg.phi_max,
                    "Flux mapped to intensity 255 [photons/s]")
        ->capture_default_str();
    cmd->add_flag("--srgb", cfg.linearize_srgb,
                  "Treat intensities as sRGB (linearize before flux scale)");
  }

  void echo(std::ostream& out) const { echo(out, cfg); }

  // echo the config a run actually used, which may carry a solved exposure
  static void echo(std::ostream& out, const SensorConfig& c) {
    out << "q=" << fmt_g(c.q) << "\n";
    out << "tau-d=" << fmt_g(c.tau_d) << "\n";
    out << "exposure=" << fmt_g(c.T) << "\n";
    out << "phi-max=" << fmt_g(c.phi_max) << "\n";
    if (c.linearize_srgb) out << "srgb=true\n";
  }
};

struct SimulateCli {
  std::string input;
  std::string out_dir;
  SensorCli sensor;
  std::uint64_t seed = 0;
  std::uint32_t frames = 1;
  std::string mode = "exact_renewal";
  double auto_expose = 0.0;
  CLI::Option* auto_expose_opt = nullptr;
  bool dump_flux = false;
  int jobs = 0;
};

struct DatasetCli {
  std::string input_root;
  std::string out_dir;
  SensorCli sensor;
  std::uint64_t seed = 0;
  std::size_t variants = 1;
  std::string layout = "ab";
  std::string mode = "exact_renewal";
  double val_fraction = 0.05;
  AugmentRanges ranges;
  double auto_expose = 0.0;
  CLI::Option* auto_expose_opt = nullptr;
  bool dry_run = false;
  bool verify = false;
  bool permissive = false;
  int jobs = 0;
};

struct MetricsCli {
  std::string ref_dir;
  std::string test_dir;
  std::string csv_path;
  std::string lpips_csv;
  bool no_timestamp = false;
  int jobs = 0;
};

struct RecoverCli {
  std::vector<std::string> inputs;
  std::string out_dir;
  SensorCli sensor;
  std::string truth_path;
  int jobs = 0;
};

struct AutoExposeCli {
  std::string input;
  SensorCli sensor;
  double target = 0.5;
};

void add_jobs_option(CLI::App* cmd, int& jobs) {
  cmd->add_option("--jobs", jobs,
                  "Worker threads (0 = all hardware threads)")
      ->envname("SPADSIM_JOBS")
      ->capture_default_str();
}

void write_run_config(const fs::path& dir, const std::string& section,
                      const std::string& body) {
  std::ofstream out(dir / "run_config.ini", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write run_config.ini in " + dir.string());
  out << "# spadsim " << kVersion
      << " resolved run configuration; reusable via --config.\n"
      << "# Execution-only knobs (--jobs, --verify, --dry-run) are omitted:\n"
      << "# they do not affect output bytes.\n"
      << "[" << section << "]\n"
      << body;
  if (!out) throw IoError("write failed: run_config.ini");
}

std::string density_line(const BinaryFrame& frame) {
  const std::vector<double> d = channel_bit_density(frame);
  char buf[160];
  if (d.size() == 3) {
    const double mean = (d[0] + d[1] + d[2]) / 3.0;
    std::snprintf(buf, sizeof(buf),
                  "density R=%.6f G=%.6f B=%.6f mean=%.6f", d[0], d[1], d[2],
                  mean);
  } else {
    std::snprintf(buf, sizeof(buf), "density %.6f", d[0]);
  }
  return buf;
}

int run_simulate(const SimulateCli& o) {
  o.sensor.cfg.validate();
  SensorConfig cfg = o.sensor.cfg;
  const SampleMode mode = parse_sample_mode(o.mode);
  const fs::path out_dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output dir: " + o.out_dir);

  const ImageU8 image = read_image_rgb(o.input);
  FluxMap flux = intensity_to_flux(image, cfg);
  flux.source_id = fs::path(o.input).filename().string();

  if (o.auto_expose_opt->count() > 0) {
    cfg.T = auto_exposure(flux, cfg, o.auto_expose);
    std::cout << "auto-exposure: T=" << fmt_g(cfg.T) << " s (target density "
              << fmt_g(o.auto_expose) << ")\n";
  }

  const std::string stem = fs::path(o.input).stem().string();
  const std::string hash8 = cfg.hash8();
  std::cout << "config: q=" << cfg.q << " tau_d=" << cfg.tau_d
            << " T=" << cfg.T << " phi_max=" << cfg.phi_max
            << " srgb=" << (cfg.linearize_srgb ? "on" : "off")
            << " mode=" << to_string(mode) << " seed=" << o.seed
            << " hash=" << hash8 << "\n";
  std::cout << "input: " << o.input << " (" << image.width << "x"
            << image.height << "x" << image.channels << ")\n";

  double density_sum = 0.0;
  for (std::uint32_t f = 0; f < o.frames; ++f) {
    const BinaryFrame frame =
        synthesize_binary_frame(flux, cfg, o.seed, f, mode, o.jobs);
    char name[256];
    std::snprintf(name, sizeof(name), "%s_f%05u_%s.png", stem.c_str(), f,
                  hash8.c_str());
    write_png(out_dir / name, frame_to_image(frame));
    const std::vector<double> d = channel_bit_density(frame);
    for (double v : d) density_sum += v / d.size();
    if (o.frames <= 16)
      std::cout << "frame " << f << ": " << density_line(frame) << " -> "
                << name << "\n";
  }
  if (o.frames > 16)
    std::cout << o.frames << " frames written, mean density "
              << density_sum / o.frames << "\n";

  if (o.dump_flux) {
    const std::string flux_name = stem + "_flux.f32";
    write_flux_raster(out_dir / flux_name, flux);
    std::cout << "flux raster -> " << flux_name << "\n";
  }

  std::ostringstream body;
  SensorCli::echo(body, cfg);
  body << "seed=" << o.seed << "\n";
  body << "frames=" << o.frames << "\n";
  body << "mode=" << to_string(mode) << "\n";
  if (o.auto_expose_opt->count() > 0)
    body << "auto-expose=" << fmt_g(o.auto_expose) << "\n";
  if (o.dump_flux) body << "dump-flux=true\n";
  write_run_config(out_dir, "simulate", body.str());
  return 0;
}

int run_autoexpose(const AutoExposeCli& o) {
  o.sensor.cfg.validate();
  const ImageU8 image = read_image_rgb(o.input);
  const FluxMap flux = intensity_to_flux(image, o.sensor.cfg);
  const double t_star = auto_exposure(flux, o.sensor.cfg, o.target);
  SensorConfig solved = o.sensor.cfg;
  solved.T = t_star;
  // achieved density, from the model rather than a sampled frame
  double acc = 0.0;
  for (double v : flux.data) acc += bit_probability(v, solved);
  acc /= static_cast<double>(flux.data.size());
  std::cout << "T=" << fmt_g(t_star) << "\n";
  std::cout << "target=" << fmt_g(o.target)
            << " achieved=" << fmt_g(acc) << "\n";
  return 0;
}

int run_dataset(const DatasetCli& o) {
  BuildOptions opts;
  opts.sensor = o.sensor.cfg;
  opts.ranges = o.ranges;
  opts.per_image_variants = o.variants;
  opts.seed = o.seed;
  opts.layout = parse_layout(o.layout);
  opts.mode = parse_sample_mode(o.mode);
  opts.val_fraction = o.val_fraction;
  opts.jobs = o.jobs;
  if (o.auto_expose_opt->count() > 0) opts.auto_expose_target = o.auto_expose;
  opts.sensor.validate();
  opts.ranges.validate();

  const SceneSet scenes = ingest_scene_dir(o.input_root, o.permissive);
  std::cout << "scenes: " << scenes.scenes.size() << ", images "
            << scenes.total_images << ", skipped " << scenes.skipped.size()
            << "\n";
  const std::size_t planned = scenes.total_images * o.variants;
  if (o.dry_run) {
    for (const auto& s : scenes.scenes)
      std::cout << "  " << s.name << ": " << s.images.size() << " image(s)\n";
    std::cout << "dry run: would build " << planned << " sample pair(s) ("
              << o.layout << " layout) under " << o.out_dir << "\n";
    return 0;
  }

  const DatasetManifest manifest =
      build_paired_dataset(scenes, opts, o.out_dir);
  std::size_t val = 0;
  for (const auto& r : manifest.rows)
    if (r.split == "val") ++val;
  std::cout << "built " << manifest.rows.size() << " sample pair(s) under "
            << o.out_dir << " (train " << manifest.rows.size() - val
            << ", val " << val << ")\n";
  std::cout << "sensor hash " << manifest.config_hash.substr(0, 8)
            << ", exposure " << fmt_g(manifest.sensor.T) << " s\n";

  std::ostringstream body;
  SensorCli::echo(body, manifest.sensor);
  body << "seed=" << o.seed << "\n";
  body << "variants=" << o.variants << "\n";
  body << "layout=" << o.layout << "\n";
  body << "mode=" << to_string(opts.mode) << "\n";
  body << "val-fraction=" << fmt_g(o.val_fraction) << "\n";
  body << "zoom-min=" << fmt_g(o.ranges.zoom_min) << "\n";
  body << "zoom-max=" << fmt_g(o.ranges.zoom_max) << "\n";
  body << "rot-min=" << fmt_g(o.ranges.rotation_min) << "\n";
  body << "rot-max=" << fmt_g(o.ranges.rotation_max) << "\n";
  body << "shear-min=" << fmt_g(o.ranges.shear_min) << "\n";
  body << "shear-max=" << fmt_g(o.ranges.shear_max) << "\n";
  if (o.auto_expose_opt->count() > 0)
    body << "auto-expose=" << fmt_g(o.auto_expose) << "\n";
  if (o.permissive) body << "permissive=true\n";
  write_run_config(o.out_dir, "dataset", body.str());

  if (o.verify) {
    const VerifyReport report = verify_manifest(
        fs::path(o.out_dir) / "manifest.jsonl", fs::path(o.input_root),
        o.jobs);
    std::cout << "verify: " << report.passed << " passed, " << report.failed
              << " failed\n";
    if (!report.all_ok()) {
      for (const auto& row : report.rows)
        if (!row.ok)
          std::cout << "  sample " << row.sample_id << ": " << row.detail
                    << "\n";
      throw Error("dataset verification failed");
    }
  }
  return 0;
}

int run_metrics(const MetricsCli& o) {
  MetricsReport report = evaluate_dirs(o.ref_dir, o.test_dir, o.jobs);
  if (!o.lpips_csv.empty()) {
    const std::size_t merged = merge_lpips_csv(report, o.lpips_csv);
    std::cout << "merged lpips for " << merged << " image(s)\n";
  }
  std::cout << metrics_table(report, !o.no_timestamp);
  if (!o.csv_path.empty()) {
    write_metrics_csv(report, o.csv_path);
    std::cout << "csv -> " << o.csv_path << "\n";
  }
  return 0;
}

int run_recover(const RecoverCli& o) {
  o.sensor.cfg.validate();
  std::vector<fs::path> files;
  if (o.inputs.size() == 1 && fs::is_directory(o.inputs[0])) {
    for (const auto& e : fs::directory_iterator(o.inputs[0]))
      if (e.is_regular_file() && e.path().extension() == ".png")
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw InputError("no .png frames in directory " + o.inputs[0]);
  } else {
    for (const auto& p : o.inputs) files.emplace_back(p);
  }

  BitStack stack;
  for (const auto& path : files) {
    const ImageU8 img = read_image_rgb(path);
    BinaryFrame frame;
    frame.width = img.width;
    frame.height = img.height;
    frame.channels = img.channels;
    frame.bits.resize(img.size());
    for (std::size_t i = 0; i < img.size(); ++i)
      frame.bits[i] = img.data[i] > 0 ? 255 : 0;
    try {
      accumulate_frame(stack, frame);
    } catch (const Error& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
  std::cout << "accumulated " << stack.n_frames << " frame(s), "
            << stack.width << "x" << stack.height << "x" << stack.channels
            << "\n";

  const FluxEstimate est = estimate_flux_from_bits(stack, o.sensor.cfg);

  const fs::path out_dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output dir: " + o.out_dir);
  write_flux_raster(out_dir / "flux.f32", est.flux);

  ImageU8 preview =
      make_image(est.flux.width, est.flux.height, est.flux.channels);
  for (std::size_t i = 0; i < est.flux.data.size(); ++i) {
    const double rel = est.flux.data[i] / o.sensor.cfg.phi_max * 255.0;
    preview.data[i] =
        static_cast<std::uint8_t>(std::lround(std::clamp(rel, 0.0, 255.0)));
  }
  write_png(out_dir / "flux_preview.png", preview);

  ImageU8 mask = make_image(est.flux.width, est.flux.height,
                            est.flux.channels);
  mask.data = est.saturated;
  write_png(out_dir / "saturation_mask.png", mask);

  std::vector<double> mean_flux(est.flux.channels, 0.0);
  for (std::size_t i = 0; i < est.flux.data.size(); ++i)
    mean_flux[i % est.flux.channels] += est.flux.data[i];
  const double per = static_cast<double>(est.flux.width) * est.flux.height;
  std::cout << "mean flux estimate [photons/s]:";
  for (int c = 0; c < est.flux.channels; ++c)
    std::cout << " " << mean_flux[c] / per;
  std::cout << "\nsaturated samples: " << est.saturated_count << "\n";

  if (!o.truth_path.empty()) {
    const FluxMap truth = read_flux_raster(o.truth_path);
    if (truth.width != est.flux.width || truth.height != est.flux.height ||
        truth.channels != est.flux.channels)
      throw InputError("truth raster dimensions do not match frames");
    std::vector<double> rel;
    rel.reserve(truth.data.size());
    for (std::size_t i = 0; i < truth.data.size(); ++i)
      if (truth.data[i] > 0.0)
        rel.push_back(std::abs(est.flux.data[i] - truth.data[i]) /
                      truth.data[i]);
    if (rel.empty()) {
      std::cout << "truth raster has no positive entries to compare\n";
    } else {
      std::nth_element(rel.begin(), rel.begin() + rel.size() / 2, rel.end());
      const double median = rel[rel.size() / 2];
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.4f", median * 100.0);
      std::cout << "median relative flux error vs truth: " << buf << "%\n";
    }
  }

  std::ostringstream body;
  o.sensor.echo(body);
  write_run_config(out_dir, "recover", body.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spadsim: single-photon camera simulation and dataset toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  // --config lives on the root app; let it match when given after the
  // subcommand name (subcommands created below inherit this)
  app.fallthrough();
  app.set_config("--config", "",
                 "Read options from an INI file (sections per subcommand; "
                 "command-line flags win)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  SimulateCli sim;
  CLI::App* c_sim = app.add_subcommand(
      "simulate", "Simulate binary frames from one intensity image");
  c_sim->add_option("input", sim.input, "Source image (png/jpg)")->required();
  c_sim->add_option("--out", sim.out_dir, "Output directory")->required();
  sim.sensor.attach(c_sim);
  c_sim->add_option("--seed", sim.seed, "Master RNG seed")
      ->capture_default_str();
  c_sim->add_option("--frames", sim.frames, "Number of frames")
      ->capture_default_str();
  c_sim->add_option("--mode", sim.mode,
                    "Sampling mode: exact_renewal or gaussian_approx")
      ->capture_default_str();
  sim.auto_expose_opt = c_sim->add_option(
      "--auto-expose", sim.auto_expose,
      "Solve exposure for this mean bit density before simulating");
  c_sim->add_flag("--dump-flux", sim.dump_flux,
                  "Also write the flux map as a .f32 raster");
  add_jobs_option(c_sim, sim.jobs);

  AutoExposeCli ae;
  CLI::App* c_ae = app.add_subcommand(
      "autoexpose", "Solve the exposure for a target mean bit density");
  c_ae->add_option("input", ae.input, "Source image (png/jpg)")->required();
  ae.sensor.attach(c_ae);
  c_ae->add_option("--target", ae.target, "Target mean bit density in (0,1)")
      ->capture_default_str();

  DatasetCli ds;
  CLI::App* c_ds = app.add_subcommand(
      "dataset", "Build a paired clean/binary dataset from a scene tree");
  c_ds->add_option("input", ds.input_root, "Scene root directory")
      ->required();
  c_ds->add_option("--out", ds.out_dir, "Output directory")->required();
  ds.sensor.attach(c_ds);
  c_ds->add_option("--seed", ds.seed, "Master RNG seed")
      ->capture_default_str();
  c_ds->add_option("--variants", ds.variants,
                   "Augmented variants per source image")
      ->capture_default_str();
  c_ds->add_option("--layout", ds.layout, "Output layout: ab or combined")
      ->capture_default_str();
  c_ds->add_option("--mode", ds.mode,
                   "Sampling mode: exact_renewal or gaussian_approx")
      ->capture_default_str();
  c_ds->add_option("--val-fraction", ds.val_fraction,
                   "Fraction of samples assigned to val")
      ->capture_default_str();
  c_ds->add_option("--zoom-min", ds.ranges.zoom_min, "Zoom range lower bound")
      ->capture_default_str();
  c_ds->add_option("--zoom-max", ds.ranges.zoom_max, "Zoom range upper bound")
      ->capture_default_str();
  c_ds->add_option("--rot-min", ds.ranges.rotation_min,
                   "Rotation range lower bound [deg]")
      ->capture_default_str();
  c_ds->add_option("--rot-max", ds.ranges.rotation_max,
                   "Rotation range upper bound [deg]")
      ->capture_default_str();
  c_ds->add_option("--shear-min", ds.ranges.shear_min,
                   "Shear range lower bound")
      ->capture_default_str();
  c_ds->add_option("--shear-max", ds.ranges.shear_max,
                   "Shear range upper bound")
      ->capture_default_str();
  ds.auto_expose_opt = c_ds->add_option(
      "--auto-expose", ds.auto_expose,
      "Solve one global exposure for this mean bit density");
  c_ds->add_flag("--dry-run", ds.dry_run,
                 "Plan only: print what would be built");
  c_ds->add_flag("--verify", ds.verify,
                 "Re-derive and hash-check every sample after the build");
  c_ds->add_flag("--permissive", ds.permissive,
                 "Tolerate empty corpora and unreadable non-image files");
  add_jobs_option(c_ds, ds.jobs);

  MetricsCli mt;
  CLI::App* c_mt = app.add_subcommand(
      "metrics", "Score matching image pairs between two directories");
  c_mt->add_option("ref", mt.ref_dir, "Reference image directory")
      ->required();
  c_mt->add_option("test", mt.test_dir, "Test image directory")->required();
  c_mt->add_option("--csv", mt.csv_path, "Write per-image CSV here");
  c_mt->add_option("--lpips-csv", mt.lpips_csv,
                   "Merge LPIPS values from this CSV (image_id,lpips)");
  c_mt->add_flag("--no-timestamp", mt.no_timestamp,
                 "Omit the timestamp line from the console table");
  add_jobs_option(c_mt, mt.jobs);

  RecoverCli rc;
  CLI::App* c_rc = app.add_subcommand(
      "recover", "Estimate per-pixel flux from a burst of binary frames");
  c_rc->add_option("inputs", rc.inputs,
                   "Frame files, or one directory of .png frames")
      ->required()
      ->expected(-1);
  c_rc->add_option("--out", rc.out_dir, "Output directory")->required();
  rc.sensor.attach(c_rc);
  c_rc->add_option("--truth", rc.truth_path,
                   "Ground-truth flux raster (.f32) to report error against");
  add_jobs_option(c_rc, rc.jobs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    // unreadable --config file is a configuration problem, not a usage one
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const CLI::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_ae->parsed()) return run_autoexpose(ae);
    if (c_ds->parsed()) return run_dataset(ds);
    if (c_mt->parsed()) return run_metrics(mt);
    if (c_rc->parsed()) return run_recover(rc);
    std::cerr << "usage error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
