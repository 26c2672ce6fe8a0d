#include "spadsim/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spadsim/errors.hpp"
#include "spadsim/frame_synth.hpp"
#include "spadsim/hash.hpp"
#include "spadsim/io.hpp"
#include "spadsim/parallel.hpp"
#include "spadsim/rng.hpp"
#include "spadsim/version.hpp"

namespace spadsim {

namespace fs = std::filesystem;

std::string_view to_string(DatasetLayout layout) {
  return layout == DatasetLayout::kAB ? "ab" : "combined";
}

DatasetLayout parse_layout(std::string_view name) {
  if (name == "ab") return DatasetLayout::kAB;
  if (name == "combined") return DatasetLayout::kCombined;
  throw InputError("unknown dataset layout '" + std::string(name) +
                   "' (expected ab or combined)");
}

static bool has_image_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return e == ".png" || e == ".jpg" || e == ".jpeg";
}

SceneSet ingest_scene_dir(const fs::path& root, bool permissive) {
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw InputError("scene root is not a directory: " + root.string());
  SceneSet set;
  set.root = root;
  std::map<std::string, Scene> scenes;
  std::vector<fs::path> top;
  for (const auto& entry : fs::directory_iterator(root)) top.push_back(entry.path());
  std::sort(top.begin(), top.end());
  for (const auto& p : top) {
    if (fs::is_directory(p)) {
      Scene scene;
      scene.name = p.filename().string();
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        if (has_image_ext(e.path()))
          files.push_back(fs::relative(e.path(), root));
        else
          set.skipped.push_back(fs::relative(e.path(), root).string());
      }
      std::sort(files.begin(), files.end());
      scene.images = std::move(files);
      if (!scene.images.empty()) scenes[scene.name] = std::move(scene);
    } else if (fs::is_regular_file(p)) {
      if (has_image_ext(p))
        scenes["_root"].images.push_back(fs::relative(p, root));
      else
        set.skipped.push_back(p.filename().string());
    }
  }
  if (scenes.count("_root")) {
    scenes["_root"].name = "_root";
    std::sort(scenes["_root"].images.begin(), scenes["_root"].images.end());
  }
  for (auto& [name, scene] : scenes) {
    set.total_images += scene.images.size();
    set.scenes.push_back(std::move(scene));
  }
  if (set.total_images == 0 && !permissive)
    throw InputError("no images found under " + root.string());
  return set;
}

std::string_view train_val_split(std::uint64_t sample_id,
                                 double val_fraction) {
  const double u =
      static_cast<double>(splitmix64(sample_id) >> 11) * 0x1.0p-53;
  return u < val_fraction ? "val" : "train";
}

static std::string sample_stem(std::uint64_t sample_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%06llu",
                static_cast<unsigned long long>(sample_id));
  return buf;
}

// Clean target on the left, simulated binary frame on the right.
static ImageU8 combine_pair(const ImageU8& clean, const ImageU8& binary) {
  ImageU8 out = make_image(clean.width * 2, clean.height, clean.channels);
  for (int y = 0; y < clean.height; ++y)
    for (int x = 0; x < clean.width; ++x)
      for (int c = 0; c < clean.channels; ++c) {
        out.at(x, y, c) = clean.at(x, y, c);
        out.at(x + clean.width, y, c) = binary.at(x, y, c);
      }
  return out;
}

static nlohmann::json header_json(const DatasetManifest& m,
                                  std::size_t planned) {
  nlohmann::json sensor_j, ranges_j;
  to_json(sensor_j, m.sensor);
  to_json(ranges_j, m.ranges);
  return nlohmann::json{{"type", "header"},
                        {"version", m.version},
                        {"seed", m.seed},
                        {"sensor", sensor_j},
                        {"config_hash", m.config_hash},
                        {"aug_ranges", ranges_j},
                        {"layout", std::string(to_string(m.layout))},
                        {"sample_mode", std::string(to_string(m.mode))},
                        {"per_image_variants", m.per_image_variants},
                        {"val_fraction", m.val_fraction},
                        {"input_root", m.input_root},
                        {"total_images", m.total_images},
                        {"planned_samples", planned}};
}

static nlohmann::json row_json(const SampleRecord& r, DatasetLayout layout) {
  nlohmann::json aug_j;
  to_json(aug_j, r.aug);
  nlohmann::json j{{"type", "sample"},
                   {"sample_id", r.sample_id},
                   {"scene", r.scene},
                   {"source", r.source},
                   {"aug", aug_j},
                   {"seed", r.seed},
                   {"frame_index", r.frame_index},
                   {"split", r.split}};
  if (layout == DatasetLayout::kAB) {
    j["a_path"] = r.a_path;
    j["b_path"] = r.b_path;
    j["a_sha256"] = r.a_sha256;
    j["b_sha256"] = r.b_sha256;
  } else {
    j["pair_path"] = r.pair_path;
    j["pair_sha256"] = r.pair_sha256;
  }
  return j;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << header_json(manifest, manifest.rows.size()).dump() << "\n";
  for (const auto& r : manifest.rows)
    out << row_json(r, manifest.layout).dump() << "\n";
  out << nlohmann::json{{"type", "footer"},
                        {"samples", manifest.rows.size()},
                        {"status", "complete"}}
             .dump()
      << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open manifest: " + path.string());
  DatasetManifest m;
  bool have_header = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("manifest line " + std::to_string(lineno) +
                       ": not valid json: " + e.what());
    }
    const std::string type = j.value("type", "");
    try {
      if (type == "header") {
        have_header = true;
        m.version = j.at("version").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        from_json(j.at("sensor"), m.sensor);
        m.config_hash = j.at("config_hash").get<std::string>();
        from_json(j.at("aug_ranges"), m.ranges);
        m.layout = parse_layout(j.at("layout").get<std::string>());
        m.mode = parse_sample_mode(j.at("sample_mode").get<std::string>());
        m.per_image_variants = j.at("per_image_variants").get<std::size_t>();
        m.val_fraction = j.at("val_fraction").get<double>();
        m.input_root = j.at("input_root").get<std::string>();
        m.total_images = j.at("total_images").get<std::size_t>();
      } else if (type == "sample") {
        SampleRecord r;
        r.sample_id = j.at("sample_id").get<std::uint64_t>();
        r.scene = j.at("scene").get<std::string>();
        r.source = j.at("source").get<std::string>();
        from_json(j.at("aug"), r.aug);
        r.seed = j.at("seed").get<std::uint64_t>();
        r.frame_index = j.at("frame_index").get<std::uint32_t>();
        r.split = j.at("split").get<std::string>();
        r.a_path = j.value("a_path", "");
        r.b_path = j.value("b_path", "");
        r.a_sha256 = j.value("a_sha256", "");
        r.b_sha256 = j.value("b_sha256", "");
        r.pair_path = j.value("pair_path", "");
        r.pair_sha256 = j.value("pair_sha256", "");
        m.rows.push_back(std::move(r));
      } else if (type == "footer") {
        m.complete = j.value("status", "") == "complete";
      } else {
        throw InputError("manifest line " + std::to_string(lineno) +
                         ": unknown row type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError("manifest line " + std::to_string(lineno) + ": " +
                       e.what());
    }
  }
  if (!have_header)
    throw InputError("manifest has no header row: " + path.string());
  std::sort(m.rows.begin(), m.rows.end(),
            [](const SampleRecord& a, const SampleRecord& b) {
              return a.sample_id < b.sample_id;
            });
  return m;
}

namespace {

struct SourceRef {
  std::string scene;
  fs::path rel;
};

std::vector<SourceRef> flatten_sources(const SceneSet& scenes) {
  std::vector<SourceRef> out;
  out.reserve(scenes.total_images);
  for (const auto& scene : scenes.scenes)
    for (const auto& img : scene.images)
      out.push_back(SourceRef{scene.name, img});
  return out;
}

// Rendered sample for one record: encoded bytes per layout slot.
struct RenderedSample {
  std::vector<std::uint8_t> a_png, b_png, pair_png;
};

RenderedSample render_sample(const ImageU8& source, const AugmentSpec& aug,
                             const SensorConfig& sensor, SampleMode mode,
                             std::uint64_t seed, std::uint64_t sample_id,
                             DatasetLayout layout) {
  const ImageU8 clean = apply_affine(source, aug);
  const FluxMap flux = intensity_to_flux(clean, sensor);
  const BinaryFrame frame = synthesize_binary_frame(
      flux, sensor, seed, static_cast<std::uint32_t>(sample_id), mode, 1);
  const ImageU8 binary = frame_to_image(frame);
  RenderedSample out;
  if (layout == DatasetLayout::kAB) {
    out.a_png = encode_png(binary);
    out.b_png = encode_png(clean);
  } else {
    out.pair_png = encode_png(combine_pair(clean, binary));
  }
  return out;
}

}  // namespace

DatasetManifest build_paired_dataset(const SceneSet& scenes,
                                     const BuildOptions& options,
                                     const fs::path& out_root) {
  options.sensor.validate();
  options.ranges.validate();
  if (options.per_image_variants < 1)
    throw InputError("per_image_variants must be >= 1");
  if (!(options.val_fraction >= 0.0 && options.val_fraction < 1.0))
    throw InputError("val_fraction must be in [0, 1)");
  if (scenes.total_images == 0)
    throw InputError("scene set is empty");
  if (options.auto_expose_target &&
      !(*options.auto_expose_target > 0.0 && *options.auto_expose_target < 1.0))
    throw InputError("auto-expose target must be in (0, 1)");

  const std::vector<SourceRef> sources = flatten_sources(scenes);
  const std::size_t total =
      sources.size() * options.per_image_variants;

  SensorConfig sensor = options.sensor;
  if (options.auto_expose_target) {
    // Pool up to 64 evenly strided sources into one histogram; flux values
    // come from a shared 256-entry LUT, so counts just add.
    const std::size_t stride = (sources.size() + 63) / 64;
    std::map<double, std::size_t> hist;
    for (std::size_t i = 0; i < sources.size(); i += stride) {
      const ImageU8 img = read_image_rgb(scenes.root / sources[i].rel);
      const FluxMap flux = intensity_to_flux(img, sensor);
      for (double v : flux.data) ++hist[v];
    }
    sensor.T =
        exposure_for_histogram(hist, sensor, *options.auto_expose_target);
  }

  std::error_code ec;
  fs::create_directories(out_root, ec);
  if (ec) throw IoError("cannot create " + out_root.string());
  if (options.layout == DatasetLayout::kAB) {
    fs::create_directories(out_root / "A");
    fs::create_directories(out_root / "B");
  } else {
    fs::create_directories(out_root / "pairs");
  }

  const fs::path partial = out_root / "manifest.jsonl.partial";
  {
    std::ofstream mark(partial, std::ios::trunc);
    if (!mark) throw IoError("cannot create " + partial.string());
    mark << "building\n";
  }

  const std::vector<AugmentSpec> specs =
      sample_augment_specs(options.seed, total, options.ranges);

  DatasetManifest manifest;
  manifest.version = kVersion;
  manifest.seed = options.seed;
  manifest.sensor = sensor;
  manifest.config_hash = sensor.hash();
  manifest.ranges = options.ranges;
  manifest.layout = options.layout;
  manifest.mode = options.mode;
  manifest.per_image_variants = options.per_image_variants;
  manifest.val_fraction = options.val_fraction;
  manifest.input_root = scenes.root.string();
  manifest.total_images = sources.size();
  manifest.complete = true;
  manifest.rows.resize(total);

  std::atomic<bool> abort{false};
  std::mutex err_mu;
  std::string err_msg;
  auto fail = [&](const std::string& msg) {
    std::lock_guard<std::mutex> lock(err_mu);
    if (!abort.exchange(true)) err_msg = msg;
  };

  parallel_for(sources.size(), options.jobs,
               [&](std::size_t img0, std::size_t img1) {
    for (std::size_t i = img0; i < img1 && !abort.load(); ++i) {
      ImageU8 src;
      try {
        src = read_image_rgb(scenes.root / sources[i].rel);
      } catch (const Error& e) {
        fail("source " + sources[i].rel.string() + ": " + e.what());
        return;
      }
      for (std::size_t v = 0; v < options.per_image_variants; ++v) {
        if (abort.load()) return;
        const std::uint64_t sid = i * options.per_image_variants + v;
        SampleRecord& r = manifest.rows[sid];
        try {
          const RenderedSample rendered =
              render_sample(src, specs[sid], sensor, options.mode,
                            options.seed, sid, options.layout);
          r.sample_id = sid;
          r.scene = sources[i].scene;
          r.source = sources[i].rel.string();
          r.aug = specs[sid];
          r.seed = options.seed;
          r.frame_index = static_cast<std::uint32_t>(sid);
          r.split = std::string(
              train_val_split(sid, options.val_fraction));
          const std::string stem = sample_stem(sid);
          if (options.layout == DatasetLayout::kAB) {
            r.a_path = "A/" + stem + ".png";
            r.b_path = "B/" + stem + ".png";
            r.a_sha256 = sha256_hex(rendered.a_png);
            r.b_sha256 = sha256_hex(rendered.b_png);
            write_bytes(out_root / r.a_path, rendered.a_png);
            write_bytes(out_root / r.b_path, rendered.b_png);
          } else {
            r.pair_path = "pairs/" + stem + ".png";
            r.pair_sha256 = sha256_hex(rendered.pair_png);
            write_bytes(out_root / r.pair_path, rendered.pair_png);
          }
        } catch (const std::exception& e) {
          fail("sample " + std::to_string(sid) + " (" +
               sources[i].rel.string() + "): " + e.what());
          return;
        }
      }
    }
  });

  if (abort.load())
    throw Error("dataset build aborted: " + err_msg +
                " (partial marker left at " + partial.string() + ")");

  write_manifest(manifest, out_root / "manifest.jsonl");
  {
    std::ofstream train(out_root / "train.txt",
                        std::ios::binary | std::ios::trunc);
    std::ofstream val(out_root / "val.txt",
                      std::ios::binary | std::ios::trunc);
    if (!train || !val) throw IoError("cannot write split lists");
    for (const auto& r : manifest.rows) {
      const std::string& p =
          options.layout == DatasetLayout::kAB ? r.a_path : r.pair_path;
      (r.split == "val" ? val : train) << p << "\n";
    }
  }
  fs::remove(partial);
  return manifest;
}

VerifyReport verify_manifest(
    const fs::path& manifest_path,
    const std::optional<fs::path>& input_root_override, int jobs) {
  const DatasetManifest m = read_manifest(manifest_path);
  const fs::path out_root = manifest_path.parent_path();
  const fs::path input_root =
      input_root_override.value_or(fs::path(m.input_root));

  // Group rows by source so each image decodes once.
  std::map<std::string, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < m.rows.size(); ++i)
    by_source[m.rows[i].source].push_back(i);
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups(
      by_source.begin(), by_source.end());

  VerifyReport report;
  report.rows.resize(m.rows.size());

  parallel_for(groups.size(), jobs, [&](std::size_t g0, std::size_t g1) {
    for (std::size_t g = g0; g < g1; ++g) {
      const auto& [source, indices] = groups[g];
      ImageU8 src;
      std::string load_error;
      try {
        src = read_image_rgb(input_root / source);
      } catch (const Error& e) {
        load_error = e.what();
      }
      for (const std::size_t i : indices) {
        const SampleRecord& r = m.rows[i];
        VerifyRow& out = report.rows[i];
        out.sample_id = r.sample_id;
        if (!load_error.empty()) {
          out.ok = false;
          out.detail = "source unreadable: " + load_error;
          continue;
        }
        std::string detail;
        try {
          const RenderedSample rendered =
              render_sample(src, r.aug, m.sensor, m.mode, r.seed,
                            r.sample_id, m.layout);
          auto check = [&](const std::string& rel,
                           const std::string& recorded,
                           const std::vector<std::uint8_t>& bytes,
                           const char* tag) {
            const std::string recomputed = sha256_hex(bytes);
            if (recomputed != recorded) {
              detail += std::string(tag) +
                        ": manifest hash does not match regenerated bytes; ";
              return;
            }
            const fs::path p = out_root / rel;
            std::error_code ec;
            if (!fs::exists(p, ec)) {
              detail += std::string(tag) + ": file missing; ";
              return;
            }
            if (sha256_file(p) != recorded)
              detail += std::string(tag) + ": file bytes differ; ";
          };
          if (m.layout == DatasetLayout::kAB) {
            check(r.a_path, r.a_sha256, rendered.a_png, "a");
            check(r.b_path, r.b_sha256, rendered.b_png, "b");
          } else {
            check(r.pair_path, r.pair_sha256, rendered.pair_png, "pair");
          }
        } catch (const std::exception& e) {
          detail = std::string("regeneration failed: ") + e.what();
        }
        out.ok = detail.empty();
        out.detail = std::move(detail);
      }
    }
  });

  std::sort(report.rows.begin(), report.rows.end(),
            [](const VerifyRow& a, const VerifyRow& b) {
              return a.sample_id < b.sample_id;
            });
  for (const auto& row : report.rows)
    row.ok ? ++report.passed : ++report.failed;
  return report;
}

}  // namespace spadsim
