#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aerial/field.hpp"
#include "aerial/partition.hpp"

namespace aerial {

namespace fs = std::filesystem;

/// A pose read from a JSON-lines file. Query poses may omit "time".
struct PoseRecord {
  CameraPose pose;
  bool has_time = true;
};

std::string camera_to_json(const CameraPose& pose);

/// Parses one JSON object per non-blank line. Errors are DataError and name
/// the source, line and field.
std::vector<PoseRecord> parse_poses(std::istream& in, const std::string& source, bool require_time);

void write_cameras(const fs::path& path, std::span<const CameraPose> cameras);
std::vector<CameraPose> read_cameras(const fs::path& path);
std::vector<PoseRecord> read_poses(const fs::path& path);

std::string regions_to_json(const RegionSet& regions);
/// Camera ids in assignments, home and boundary must all be in `cameras`.
RegionSet regions_from_json(const std::string& text, std::span<const CameraPose> cameras);
void write_regions(const fs::path& path, const RegionSet& regions);
RegionSet read_regions(const fs::path& path, std::span<const CameraPose> cameras);

/// Binary field checkpoint: "ANFV1", bbox as 6 f64 (min then max), the
/// resolution as 3 u32, raw densities then interleaved raw colors as f32,
/// little-endian throughout.
void write_checkpoint(const fs::path& path, const VoxelGridField& field);
VoxelGridField read_checkpoint(const fs::path& path);

/// Little-endian color PFM, bottom row first.
void write_pfm(const fs::path& path, const Image& image);
Image read_pfm(const fs::path& path);
/// 8-bit sRGB-encoded P6 preview.
void write_ppm(const fs::path& path, const Image& image);

struct DatasetManifest {
  int version = 1;
  std::string cameras_file = "cameras.jsonl";
  std::string images_dir = "images";
  SceneFrame frame;
};

struct Dataset {
  fs::path root;
  DatasetManifest manifest;
  std::vector<CameraPose> cameras;
  std::vector<Image> images;  ///< Same order as cameras; empty when not loaded.
};

fs::path image_path(const fs::path& root, const DatasetManifest& manifest, const std::string& camera_id);

void write_dataset(const fs::path& root, const DatasetManifest& manifest, std::span<const CameraPose> cameras,
                   std::span<const Image> images);
/// Checks the version and that every camera has exactly one image file.
Dataset read_dataset(const fs::path& root, bool load_images = true);

/// Flat "key = value" configuration. '#' starts a comment. Every key must be
/// consumed through a getter before finish(), which rejects the rest.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source);
  static Config load(const fs::path& path);

  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  /// AERO_SEED, when set, replaces the configured or fallback value.
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  /// Whitespace-separated numbers.
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback);
  /// Semicolon-separated RGB triples.
  std::vector<Vec3> get_colors(const std::string& key, const std::vector<Vec3>& fallback);
  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  /// Throws DataError naming the first unknown key.
  void finish() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
  };
  const Entry* take(const std::string& key);
  [[noreturn]] void fail(const std::string& key, const Entry& e, const std::string& what) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
};

/// Value of AERO_SEED when set; throws DataError when it is not an integer.
std::optional<std::uint64_t> seed_override();

}  // namespace aerial
