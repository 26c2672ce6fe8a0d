#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spadsim/augment.hpp"
#include "spadsim/sampler.hpp"
#include "spadsim/sensor_config.hpp"

namespace spadsim {

enum class DatasetLayout {
  kAB,        // A/s<id>.png (binary) + B/s<id>.png (clean target)
  kCombined,  // pairs/s<id>.png, clean left, binary right, double width
};

std::string_view to_string(DatasetLayout layout);
DatasetLayout parse_layout(std::string_view name);

struct Scene {
  std::string name;
  std::vector<std::filesystem::path> images;  // relative to the set root
};

/// Source corpus: root/<scene>/*.png|jpg, one directory per scene. Loose
/// images directly under root form the implicit scene "_root".
struct SceneSet {
  std::filesystem::path root;
  std::vector<Scene> scenes;        // sorted by name; images sorted
  std::size_t total_images = 0;
  std::vector<std::string> skipped; // non-image files we ignored
};

/// permissive=false throws InputError on an empty corpus or an unreadable
/// directory; permissive=true records skips and returns what it found.
SceneSet ingest_scene_dir(const std::filesystem::path& root,
                          bool permissive = false);

struct SampleRecord {
  std::uint64_t sample_id = 0;  // image_index * variants + variant
  std::string scene;
  std::string source;           // source image, relative to input root
  AugmentSpec aug;
  std::uint64_t seed = 0;       // master seed (sampling key)
  std::uint32_t frame_index = 0;  // == sample_id
  std::string split;            // "train" | "val"
  std::string a_path;           // ab layout, relative to output root
  std::string b_path;
  std::string pair_path;        // combined layout
  std::string a_sha256;
  std::string b_sha256;
  std::string pair_sha256;
};

struct DatasetManifest {
  std::string version;
  std::uint64_t seed = 0;
  SensorConfig sensor;
  std::string config_hash;
  AugmentRanges ranges;
  DatasetLayout layout = DatasetLayout::kAB;
  SampleMode mode = SampleMode::kExactRenewal;
  std::size_t per_image_variants = 1;
  double val_fraction = 0.05;
  std::string input_root;
  std::size_t total_images = 0;
  bool complete = false;  // footer present on read
  std::vector<SampleRecord> rows;  // sorted by sample_id
};

struct BuildOptions {
  SensorConfig sensor;
  AugmentRanges ranges;
  std::size_t per_image_variants = 1;
  std::uint64_t seed = 0;
  DatasetLayout layout = DatasetLayout::kAB;
  SampleMode mode = SampleMode::kExactRenewal;
  double val_fraction = 0.05;
  int jobs = 1;
  /// If set, solve one global exposure for this bit density over a pooled
  /// histogram of up to 64 sources and use it for every sample.
  std::optional<double> auto_expose_target;
};

/// Builds the paired dataset under out_root: sample images, manifest.jsonl,
/// train.txt, val.txt. While writing, out_root/manifest.jsonl.partial marks
/// the build as incomplete; any worker error aborts the build and leaves the
/// marker behind. Output bytes depend only on (scene set, options minus
/// jobs), never on jobs or scheduling.
DatasetManifest build_paired_dataset(const SceneSet& scenes,
                                     const BuildOptions& options,
                                     const std::filesystem::path& out_root);

/// Seed-independent assignment: splitmix64(sample_id) against val_fraction.
std::string_view train_val_split(std::uint64_t sample_id, double val_fraction);

void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct VerifyRow {
  std::uint64_t sample_id = 0;
  bool ok = false;
  std::string detail;  // which check failed, empty when ok
};

struct VerifyReport {
  std::vector<VerifyRow> rows;  // sorted by sample_id
  std::size_t passed = 0;
  std::size_t failed = 0;
  bool all_ok() const { return failed == 0; }
};

/// Re-derives every sample from the manifest (same augment, same sampling)
/// and checks both the recorded hash and the on-disk file against it.
/// Missing or modified files fail their row; nothing is fatal per row.
VerifyReport verify_manifest(
    const std::filesystem::path& manifest_path,
    const std::optional<std::filesystem::path>& input_root_override = {},
    int jobs = 1);

}  // namespace spadsim
