#include "groundplan/perception.hpp"

#include <algorithm>
#include <cmath>

#include "groundplan/errors.hpp"
#include "groundplan/random.hpp"

namespace groundplan {

using nlohmann::json;

void CameraConfig::validate() const {
  if (!(range > 0.0)) throw Error(ErrorCode::InvalidArgument, "camera range must be positive");
  if (!(fov > 0.0) || fov > kTwoPi + kGeomEps)
    throw Error(ErrorCode::InvalidArgument, "camera fov must be in (0, 2pi]");
}

void DetectorConfig::validate() const {
  if (!(true_positive_rate >= 0.0 && true_positive_rate <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "true_positive_rate must be in [0, 1]");
  if (!(false_positive_rate >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "false_positive_rate must be non-negative");
  if (false_positive_rate > 0.0 && distractor_vocabulary.empty())
    throw Error(ErrorCode::InvalidArgument,
                "false_positive_rate > 0 requires a non-empty distractor vocabulary");
}

json camera_to_json(const CameraConfig& c) {
  return json{{"range", c.range},
              {"fov_deg", c.fov * 180.0 / std::numbers::pi},
              {"occlusion", c.occlusion_enabled}};
}

CameraConfig camera_from_json(const json& doc) {
  CameraConfig c;
  c.range = doc.value("range", c.range);
  if (doc.contains("fov_deg")) c.fov = doc.at("fov_deg").get<double>() * std::numbers::pi / 180.0;
  c.occlusion_enabled = doc.value("occlusion", c.occlusion_enabled);
  c.validate();
  return c;
}

json detector_to_json(const DetectorConfig& d) {
  return json{{"true_positive_rate", d.true_positive_rate},
              {"false_positive_rate", d.false_positive_rate},
              {"distractors", d.distractor_vocabulary}};
}

DetectorConfig detector_from_json(const json& doc) {
  DetectorConfig d;
  d.true_positive_rate = doc.value("true_positive_rate", d.true_positive_rate);
  d.false_positive_rate = doc.value("false_positive_rate", d.false_positive_rate);
  if (doc.contains("distractors")) {
    auto names = doc.at("distractors").get<std::vector<std::string>>();
    d.distractor_vocabulary = ObjectList::from_names(names).names();
  }
  d.validate();
  return d;
}

std::vector<std::size_t> visible_objects(const Scene& scene, const CameraPose& pose,
                                         const CameraConfig& camera) {
  const Point eye = pose.position();
  const double half_fov = camera.fov / 2;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const Point target = scene.objects[i].position;
    const double d = distance(eye, target);
    if (d > camera.range) continue;
    if (d > kGeomEps && camera.fov < kTwoPi - kGeomEps) {
      const double bearing = std::atan2(target.y - eye.y, target.x - eye.x);
      if (std::abs(wrap_angle(bearing - pose.theta)) > half_fov + 1e-12) continue;
    }
    if (camera.occlusion_enabled &&
        std::any_of(scene.obstacles.begin(), scene.obstacles.end(),
                    [&](const Rect& r) { return segment_crosses_interior(eye, target, r); }))
      continue;
    out.push_back(i);
  }
  return out;
}

std::uint64_t view_seed(std::uint64_t run_seed, std::size_t pose_index) {
  return derive_seed(run_seed, static_cast<std::uint64_t>(pose_index));
}

ViewDetections detect(const Scene& scene, const CameraPose& pose, const CameraConfig& camera,
                      const DetectorConfig& detector, std::uint64_t view_seed_value) {
  detector.validate();
  for (const auto& name : detector.distractor_vocabulary) {
    if (std::any_of(scene.objects.begin(), scene.objects.end(),
                    [&](const ObjectInstance& o) { return o.class_name == name; }))
      throw Error(ErrorCode::InvalidArgument,
                  "distractor '" + name + "' is a class of scene '" + scene.id + "'");
  }
  Rng rng(view_seed_value);
  ViewDetections view{pose, {}};
  for (auto i : visible_objects(scene, pose, camera)) {
    if (rng.bernoulli(detector.true_positive_rate)) view.names.push_back(scene.objects[i].class_name);
  }
  if (detector.false_positive_rate > 0.0) {
    const auto spurious = rng.poisson(detector.false_positive_rate);
    const auto& vocab = detector.distractor_vocabulary;
    for (std::uint64_t k = 0; k < spurious; ++k) view.names.push_back(vocab[rng.below(vocab.size())]);
  }
  std::sort(view.names.begin(), view.names.end());
  return view;
}

std::vector<ViewDetections> detect_all(const Scene& scene, std::span<const CameraPose> poses,
                                       const CameraConfig& camera, const DetectorConfig& detector,
                                       std::uint64_t run_seed) {
  std::vector<ViewDetections> views;
  views.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i)
    views.push_back(detect(scene, poses[i], camera, detector, view_seed(run_seed, i)));
  return views;
}

ObjectList aggregate_object_list(std::span<const ViewDetections> views) {
  std::vector<std::string> all;
  for (const auto& v : views) all.insert(all.end(), v.names.begin(), v.names.end());
  return ObjectList::from_names(all);
}

json detections_to_json(const ViewDetections& view) {
  return json{{"pose", pose_to_json(view.pose)}, {"names", view.names}};
}

}  // namespace groundplan
