#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundplan/geometry.hpp"

namespace groundplan {

enum class RoomType { Kitchen, LivingRoom, Bedroom, Bathroom };

inline constexpr std::array<RoomType, 4> kAllRoomTypes = {
    RoomType::Kitchen, RoomType::LivingRoom, RoomType::Bedroom, RoomType::Bathroom};

std::string_view to_string(RoomType type);
/// Accepts the canonical names ("kitchen", "living_room", ...) and a few
/// spellings seen in exported data ("LivingRoom", "living room").
RoomType parse_room_type(std::string_view text);
/// Column label used in success tables: Kit., Living., Bed., Bath.
std::string_view short_label(RoomType type);

/// Lowercases, maps '_' to ' ', trims and collapses runs of whitespace.
std::string normalize_class_name(std::string_view raw);

struct ObjectInstance {
  std::string class_name;
  Point position;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

/// Sorted, duplicate-free list of normalized class names.
class ObjectList {
 public:
  ObjectList() = default;

  /// Normalizes, sorts and deduplicates. Empty names are dropped.
  static ObjectList from_names(std::span<const std::string> names);
  static ObjectList from_names(std::initializer_list<std::string_view> names);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  bool contains(std::string_view name) const;

  /// Set union, still sorted and unique.
  ObjectList merged(const ObjectList& other) const;

  /// "[a, b, c]"
  std::string render() const;

  friend bool operator==(const ObjectList&, const ObjectList&) = default;

 private:
  std::vector<std::string> names_;
};

struct Scene {
  static constexpr int kFormatVersion = 1;

  std::string id;
  RoomType room_type = RoomType::Kitchen;
  Rect bounds;
  std::vector<Rect> obstacles;
  std::vector<ObjectInstance> objects;
  int format_version = kFormatVersion;

  /// True when p is inside bounds and not strictly inside an obstacle.
  bool is_achievable(Point p) const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Throws Error{Validation} naming the first violated invariant.
void validate_scene(const Scene& scene);

nlohmann::json scene_to_json(const Scene& scene);
/// Parses, normalizes class names and validates.
Scene scene_from_json(const nlohmann::json& doc);

Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);
/// Loads every *.json file in a directory, sorted by file name.
std::vector<Scene> load_scene_directory(const std::filesystem::path& dir);

/// Lattice points (x_min + i*G, y_min + j*G) inside bounds and outside every
/// obstacle interior. Row-major: y outer, x inner.
std::vector<Point> achievable_grid_points(const Scene& scene, double grid_side);

ObjectList ground_truth_object_list(const Scene& scene);

// ---------------------------------------------------------------------------
// Synthetic scenes

/// Per-room-type class vocabulary used by the scene generator.
using Catalog = std::map<RoomType, std::vector<std::string>>;

Catalog load_catalog(const std::filesystem::path& path);
Catalog catalog_from_json(const nlohmann::json& doc);

template <typename T>
struct Range {
  T lo;
  T hi;
  bool valid() const { return lo <= hi; }
};

struct SceneGenSpec {
  RoomType room_type = RoomType::Kitchen;
  /// Room side lengths are drawn as size_offset + size_quantum * n and kept
  /// inside these ranges.
  Range<double> width{3.5, 8.0};
  Range<double> height{3.5, 8.0};
  double size_quantum = 0.75;
  double size_offset = 0.5;
  Range<int> obstacle_count{1, 4};
  Range<double> obstacle_side{0.5, 1.5};
  Range<int> object_count{8, 16};
  Catalog catalog;
  int max_attempts = 200;

  void validate() const;
};

/// Deterministic for a fixed (spec, seed). Throws Error{Generation} when no
/// connected layout is found within spec.max_attempts.
Scene generate_synthetic_scene(const SceneGenSpec& spec, std::uint64_t seed);

/// 4-connected flood fill over a raster of the achievable area.
bool achievable_area_connected(const Scene& scene, double resolution = 0.125);

/// Directory holding the bundled catalog, synonym table and templates.
/// GROUNDPLAN_DATA_DIR overrides the compiled-in location.
std::filesystem::path default_data_dir();

}  // namespace groundplan
