#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundplan/backend.hpp"
#include "groundplan/evaluation.hpp"
#include "groundplan/exploration.hpp"
#include "groundplan/perception.hpp"
#include "groundplan/scene.hpp"
#include "groundplan/validator.hpp"

namespace groundplan {

enum class EvaluationMode { AutoOnly, HumanVotes };

struct SceneSource {
  /// Load every scene file from this directory...
  std::optional<std::filesystem::path> directory;
  /// ...or generate `count` scenes, cycling through the room types.
  int count = 4;
  std::uint64_t seed = 0;
  SceneGenSpec generator;
};

struct BackendConfig {
  enum class Mode { Http, Cassette, Record, Scripted };
  Mode mode = Mode::Scripted;
  /// Falls back to PLAN_BACKEND_URL when empty.
  std::string url;
  std::filesystem::path cassette;
  std::string model = "default";
  int max_tokens = kDefaultMaxTokens;
  std::chrono::milliseconds timeout{30000};
};

struct ExperimentConfig {
  std::uint64_t master_seed = 0;
  SceneSource scenes;
  std::filesystem::path catalog;
  CollectionStrategy strategy;
  CameraConfig camera;
  DetectorConfig detector;
  BackendConfig backend;
  std::filesystem::path template_path;
  std::filesystem::path instructions_path;
  int instructions_per_scene = 1;
  std::filesystem::path synonyms_path;
  RuleSet rules = RuleSet::lenient();
  EvaluationMode evaluation = EvaluationMode::AutoOnly;
  std::filesystem::path output_dir = "out";
};

/// Relative paths resolve against base_dir. "master_seed" is mandatory and
/// every referenced file must exist.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc,
                                             const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Canonical form used for the provenance hash (output_dir excluded).
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);
/// Defaults: blockwise criterion, grid 0.75 m, 120 degree unit angle, bundled data files.
ExperimentConfig default_experiment_config();

std::vector<Scene> load_scenes(const ExperimentConfig& config);
std::shared_ptr<PlanBackend> make_backend(const BackendConfig& config);
/// Room type -> instruction list, read from the instructions file.
std::map<RoomType, std::vector<std::string>> load_instructions(const std::filesystem::path& path);

struct ItemOutcome {
  std::string item_id;
  std::string instruction;
  std::optional<Plan> plan;
  std::optional<ValidationReport> validation;
  /// {code, message} of the stage that failed.
  std::optional<std::pair<std::string, std::string>> error;
};

struct SceneOutcome {
  std::string scene_id;
  RoomType room_type = RoomType::Kitchen;
  std::size_t image_count = 0;
  ObjectList ground_truth;
  ObjectList predicted;
  std::vector<ItemOutcome> items;
  std::optional<std::pair<std::string, std::string>> error;
};

struct ExperimentReport {
  std::vector<SceneOutcome> scenes;
  SuccessTable table;
  std::optional<FailureBreakdown> breakdown;
  EvaluationMode evaluation = EvaluationMode::AutoOnly;
  bool complete = true;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string backend;
};

nlohmann::json experiment_report_to_json(const ExperimentReport& report);

/// explore -> detect -> aggregate -> prompt -> plan -> validate for every
/// scene and instruction, writing all artifacts under config.output_dir.
/// Stage failures are recorded per item and the run continues.
/// `backend` overrides the configured one when given.
ExperimentReport run_experiment(const ExperimentConfig& config,
                                std::shared_ptr<PlanBackend> backend = nullptr);

/// Per-scene exploration result shared by run_experiment, the CLI and the service.
struct Exploration {
  std::vector<CameraPose> poses;
  std::vector<ViewDetections> views;
  ObjectList predicted;
};

Exploration explore_scene(const Scene& scene, const CollectionStrategy& strategy, const CameraConfig& camera,
                          const DetectorConfig& detector, std::uint64_t seed);

}  // namespace groundplan
