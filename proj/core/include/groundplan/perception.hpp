#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundplan/exploration.hpp"
#include "groundplan/scene.hpp"

namespace groundplan {

struct CameraConfig {
  double range = 2.0;
  double fov = std::numbers::pi / 2;
  bool occlusion_enabled = true;

  void validate() const;
};

/// Simulated open-vocabulary detector: Bernoulli recall per visible object
/// plus a Poisson number of spurious names per image.
struct DetectorConfig {
  double true_positive_rate = 0.95;
  /// Expected spurious names per image.
  double false_positive_rate = 0.0;
  std::vector<std::string> distractor_vocabulary;

  void validate() const;
};

nlohmann::json camera_to_json(const CameraConfig& camera);
CameraConfig camera_from_json(const nlohmann::json& doc);
nlohmann::json detector_to_json(const DetectorConfig& detector);
DetectorConfig detector_from_json(const nlohmann::json& doc);

struct ViewDetections {
  CameraPose pose;
  /// Multiset; sorted for stable output.
  std::vector<std::string> names;
};

/// Indices into scene.objects, ascending.
std::vector<std::size_t> visible_objects(const Scene& scene, const CameraPose& pose,
                                         const CameraConfig& camera);

/// Seed for the view at pose_index within a run seeded with run_seed.
std::uint64_t view_seed(std::uint64_t run_seed, std::size_t pose_index);

/// One simulated image. view_seed_value should come from view_seed() so a
/// view's result does not depend on evaluation order.
ViewDetections detect(const Scene& scene, const CameraPose& pose, const CameraConfig& camera,
                      const DetectorConfig& detector, std::uint64_t view_seed_value);

/// detect() over every pose, seeding each view from (run_seed, index).
std::vector<ViewDetections> detect_all(const Scene& scene, std::span<const CameraPose> poses,
                                       const CameraConfig& camera, const DetectorConfig& detector,
                                       std::uint64_t run_seed);

/// Union of all detected names, deduplicated and sorted.
ObjectList aggregate_object_list(std::span<const ViewDetections> views);

/// {"pose": {...}, "names": [...]}
nlohmann::json detections_to_json(const ViewDetections& view);

}  // namespace groundplan
