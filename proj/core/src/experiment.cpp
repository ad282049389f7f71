#include "groundplan/experiment.hpp"

#include <cstdlib>
#include <fstream>

#include "groundplan/errors.hpp"
#include "groundplan/prompt.hpp"
#include "groundplan/random.hpp"

namespace groundplan {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::exists(path)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " not found: " + path.string());
}

template <typename T>
Range<T> range_from(const json& doc, const char* key, Range<T> fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& a = doc.at(key);
  return Range<T>{a.at(0).get<T>(), a.at(1).get<T>()};
}

std::string backend_mode_name(BackendConfig::Mode m) {
  switch (m) {
    case BackendConfig::Mode::Http: return "http";
    case BackendConfig::Mode::Cassette: return "cassette";
    case BackendConfig::Mode::Record: return "record";
    case BackendConfig::Mode::Scripted: return "scripted";
  }
  return "scripted";
}

BackendConfig::Mode parse_backend_mode(const std::string& s) {
  if (s == "http") return BackendConfig::Mode::Http;
  if (s == "cassette") return BackendConfig::Mode::Cassette;
  if (s == "record") return BackendConfig::Mode::Record;
  if (s == "scripted") return BackendConfig::Mode::Scripted;
  throw Error(ErrorCode::InvalidArgument, "unknown backend mode '" + s + "'");
}

std::pair<std::string, std::string> describe_error(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return {std::string(to_string(err->code())), err->what()};
  return {"internal", e.what()};
}

json error_json(const std::optional<std::pair<std::string, std::string>>& e) {
  if (!e) return nullptr;
  return json{{"code", e->first}, {"message", e->second}};
}

}  // namespace

ExperimentConfig default_experiment_config() {
  ExperimentConfig c;
  const auto data = default_data_dir();
  c.catalog = data / "catalog.json";
  c.template_path = data / "templates" / "inference.txt";
  c.instructions_path = data / "instructions.json";
  c.synonyms_path = data / "synonyms.txt";
  c.strategy = CollectionStrategy{BlockwiseCenter{0.75, 8, 0.15}, kTwoPi / 3.0};
  return c;
}

ExperimentConfig experiment_config_from_json(const json& doc, const fs::path& base_dir) {
  ExperimentConfig c = default_experiment_config();
  try {
    if (!doc.contains("master_seed"))
      throw Error(ErrorCode::InvalidArgument, "config: master_seed is required");
    c.master_seed = doc.at("master_seed").get<std::uint64_t>();

    if (doc.contains("catalog")) c.catalog = resolve(base_dir, doc.at("catalog").get<std::string>());
    if (doc.contains("scenes")) {
      const auto& s = doc.at("scenes");
      if (s.contains("directory")) {
        c.scenes.directory = resolve(base_dir, s.at("directory").get<std::string>());
        if (!fs::is_directory(*c.scenes.directory))
          throw Error(ErrorCode::InvalidArgument, "scene directory not found: " + c.scenes.directory->string());
      } else {
        const auto& g = s.contains("generate") ? s.at("generate") : s;
        c.scenes.count = g.value("count", c.scenes.count);
        c.scenes.seed = g.value("seed", c.master_seed);
        auto& spec = c.scenes.generator;
        spec.width = range_from(g, "width", spec.width);
        spec.height = range_from(g, "height", spec.height);
        spec.obstacle_count = range_from(g, "obstacles", spec.obstacle_count);
        spec.object_count = range_from(g, "objects", spec.object_count);
        spec.size_quantum = g.value("size_quantum", spec.size_quantum);
        spec.size_offset = g.value("size_offset", spec.size_offset);
      }
    } else {
      c.scenes.seed = c.master_seed;
    }
    if (doc.contains("strategy")) c.strategy = strategy_from_json(doc.at("strategy"));
    if (doc.contains("camera")) c.camera = camera_from_json(doc.at("camera"));
    if (doc.contains("detector")) c.detector = detector_from_json(doc.at("detector"));
    if (doc.contains("backend")) {
      const auto& b = doc.at("backend");
      c.backend.mode = parse_backend_mode(b.value("mode", std::string("scripted")));
      c.backend.url = b.value("url", std::string());
      if (b.contains("cassette")) c.backend.cassette = resolve(base_dir, b.at("cassette").get<std::string>());
      c.backend.model = b.value("model", c.backend.model);
      c.backend.max_tokens = b.value("max_tokens", c.backend.max_tokens);
      c.backend.timeout = std::chrono::milliseconds(b.value("timeout_ms", std::int64_t{30000}));
    }
    if (doc.contains("template")) c.template_path = resolve(base_dir, doc.at("template").get<std::string>());
    if (doc.contains("instructions"))
      c.instructions_path = resolve(base_dir, doc.at("instructions").get<std::string>());
    c.instructions_per_scene = doc.value("instructions_per_scene", c.instructions_per_scene);
    if (doc.contains("synonyms")) c.synonyms_path = resolve(base_dir, doc.at("synonyms").get<std::string>());
    if (doc.contains("rules")) {
      c.rules = parse_rule_mode(doc.at("rules").get<std::string>()) == RuleMode::Strict ? RuleSet::strict()
                                                                                          : RuleSet::lenient();
    }
    if (doc.contains("hand_capacity")) c.rules.hand_capacity = doc.at("hand_capacity").get<std::size_t>();
    if (doc.contains("evaluation")) {
      const auto mode = doc.at("evaluation").get<std::string>();
      if (mode == "auto") {
        c.evaluation = EvaluationMode::AutoOnly;
      } else if (mode == "human") {
        c.evaluation = EvaluationMode::HumanVotes;
      } else {
        throw Error(ErrorCode::InvalidArgument, "evaluation must be 'auto' or 'human'");
      }
    }
    if (doc.contains("output_dir")) c.output_dir = resolve(base_dir, doc.at("output_dir").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("config: ") + e.what());
  }

  if (c.instructions_per_scene < 1) throw Error(ErrorCode::InvalidArgument, "instructions_per_scene must be >= 1");
  if (!c.scenes.directory) require_file(c.catalog, "catalog");
  require_file(c.template_path, "template");
  require_file(c.instructions_path, "instructions file");
  require_file(c.synonyms_path, "synonym table");
  if (c.backend.mode == BackendConfig::Mode::Cassette) require_file(c.backend.cassette, "cassette");
  if ((c.backend.mode == BackendConfig::Mode::Cassette || c.backend.mode == BackendConfig::Mode::Record) &&
      c.backend.cassette.empty())
    throw Error(ErrorCode::InvalidArgument, "backend mode needs a cassette path");
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return experiment_config_from_json(doc, path.parent_path());
}

json experiment_config_to_json(const ExperimentConfig& c) {
  json scenes;
  if (c.scenes.directory) {
    scenes = json{{"directory", c.scenes.directory->string()}};
  } else {
    const auto& g = c.scenes.generator;
    scenes = json{{"count", c.scenes.count},
                  {"seed", c.scenes.seed},
                  {"width", {g.width.lo, g.width.hi}},
                  {"height", {g.height.lo, g.height.hi}},
                  {"obstacles", {g.obstacle_count.lo, g.obstacle_count.hi}},
                  {"objects", {g.object_count.lo, g.object_count.hi}},
                  {"size_quantum", g.size_quantum},
                  {"size_offset", g.size_offset}};
  }
  return json{{"master_seed", c.master_seed},
              {"scenes", std::move(scenes)},
              {"catalog", c.catalog.string()},
              {"strategy", strategy_to_json(c.strategy)},
              {"camera", camera_to_json(c.camera)},
              {"detector", detector_to_json(c.detector)},
              {"backend",
               {{"mode", backend_mode_name(c.backend.mode)},
                {"url", c.backend.url},
                {"cassette", c.backend.cassette.filename().string()},
                {"model", c.backend.model},
                {"max_tokens", c.backend.max_tokens}}},
              {"template", c.template_path.string()},
              {"instructions", c.instructions_path.string()},
              {"instructions_per_scene", c.instructions_per_scene},
              {"synonyms", c.synonyms_path.string()},
              {"rules", std::string(to_string(c.rules.mode))},
              {"hand_capacity", c.rules.hand_capacity ? json(*c.rules.hand_capacity) : json(nullptr)},
              {"evaluation", c.evaluation == EvaluationMode::AutoOnly ? "auto" : "human"}};
}

std::vector<Scene> load_scenes(const ExperimentConfig& config) {
  if (config.scenes.directory) return load_scene_directory(*config.scenes.directory);
  SceneGenSpec spec = config.scenes.generator;
  spec.catalog = load_catalog(config.catalog);
  std::vector<Scene> scenes;
  for (int i = 0; i < config.scenes.count; ++i) {
    spec.room_type = kAllRoomTypes[static_cast<std::size_t>(i) % kAllRoomTypes.size()];
    auto scene = generate_synthetic_scene(spec, derive_seed(config.scenes.seed, static_cast<std::uint64_t>(i)));
    scene.id = "scene" + std::to_string(i) + "-" + std::string(to_string(spec.room_type));
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

std::shared_ptr<PlanBackend> make_backend(const BackendConfig& config) {
  auto http = [&]() -> std::shared_ptr<PlanBackend> {
    if (!config.url.empty()) {
      const char* key = std::getenv("PLAN_BACKEND_KEY");
      return std::make_shared<HttpBackend>(config.url, key ? key : "");
    }
    return HttpBackend::from_environment();
  };
  switch (config.mode) {
    case BackendConfig::Mode::Http: return http();
    case BackendConfig::Mode::Cassette:
      return std::make_shared<CassetteBackend>(config.cassette, CassetteBackend::Mode::Replay);
    case BackendConfig::Mode::Record:
      return std::make_shared<CassetteBackend>(config.cassette, CassetteBackend::Mode::Record, http());
    case BackendConfig::Mode::Scripted: return std::make_shared<ScriptedBackend>();
  }
  return std::make_shared<ScriptedBackend>();
}

std::map<RoomType, std::vector<std::string>> load_instructions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open instructions " + path.string());
  try {
    const auto doc = json::parse(in);
    std::map<RoomType, std::vector<std::string>> out;
    for (const auto& [key, value] : doc.items()) out[parse_room_type(key)] = value.get<std::vector<std::string>>();
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

Exploration explore_scene(const Scene& scene, const CollectionStrategy& strategy, const CameraConfig& camera,
                          const DetectorConfig& detector, std::uint64_t seed) {
  Exploration e;
  e.poses = plan_poses(scene, strategy, derive_seed(seed, 1));
  e.views = detect_all(scene, e.poses, camera, detector, derive_seed(seed, 2));
  e.predicted = aggregate_object_list(e.views);
  return e;
}

json experiment_report_to_json(const ExperimentReport& r) {
  json scenes = json::array();
  for (const auto& s : r.scenes) {
    json items = json::array();
    for (const auto& item : s.items) {
      json steps = json::array();
      if (item.plan)
        for (const auto& st : item.plan->steps) steps.push_back(st.raw);
      items.push_back(json{
          {"item_id", item.item_id},
          {"instruction", item.instruction},
          {"steps", std::move(steps)},
          {"verdict", item.validation ? json(std::string(to_string(item.validation->verdict))) : json(nullptr)},
          {"first_failure_step", item.validation && item.validation->first_failure_step
                                     ? json(*item.validation->first_failure_step)
                                     : json(nullptr)},
          {"error", error_json(item.error)}});
    }
    scenes.push_back(json{{"scene_id", s.scene_id},
                          {"room_type", std::string(to_string(s.room_type))},
                          {"image_count", s.image_count},
                          {"ground_truth_size", s.ground_truth.size()},
                          {"predicted_size", s.predicted.size()},
                          {"predicted_objects", s.predicted.names()},
                          {"artifacts",
                           {{"scene", "scenes/" + s.scene_id + ".json"},
                            {"poses", "poses/" + s.scene_id + ".ndjson"},
                            {"detections", "detections/" + s.scene_id + ".ndjson"}}},
                          {"items", std::move(items)},
                          {"error", error_json(s.error)}});
  }
  return json{{"evaluation", r.evaluation == EvaluationMode::AutoOnly ? "auto" : "human"},
              {"complete", r.complete},
              {"success_table", table_to_json(r.table)},
              {"failure_breakdown", r.breakdown ? breakdown_to_json(*r.breakdown) : json(nullptr)},
              {"scenes", std::move(scenes)},
              {"artifacts",
               {{"plans", "plans.ndjson"},
                {"validation", "validation.ndjson"},
                {"items", "items.ndjson"},
                {"table", "success_table.txt"}}},
              {"provenance",
               {{"config_hash", r.config_hash}, {"master_seed", r.master_seed}, {"backend", r.backend}}}};
}

ExperimentReport run_experiment(const ExperimentConfig& config, std::shared_ptr<PlanBackend> backend) {
  if (!backend) backend = make_backend(config.backend);
  const auto scenes = load_scenes(config);
  const auto tmpl = load_template(config.template_path, PromptMode::Inference);
  const auto instructions = load_instructions(config.instructions_path);
  const auto synonyms = SynonymTable::load(config.synonyms_path);

  const fs::path out = config.output_dir;
  for (const char* sub : {"scenes", "poses", "detections"}) fs::create_directories(out / sub);
  std::ofstream plans_log(out / "plans.ndjson");
  std::ofstream validation_log(out / "validation.ndjson");
  if (!plans_log || !validation_log) throw Error(ErrorCode::Io, "cannot write into " + out.string());

  const PlanRequestOptions request_options{config.backend.model, config.backend.max_tokens, config.backend.timeout};

  ExperimentReport report;
  report.evaluation = config.evaluation;
  report.master_seed = config.master_seed;
  report.backend = backend->identifier();
  report.config_hash = hex64(fnv1a64(experiment_config_to_json(config).dump()));

  std::vector<EvalItem> eval_items;
  std::vector<DecidedItem> auto_decided;

  for (const auto& scene : scenes) {
    SceneOutcome so;
    so.scene_id = scene.id;
    so.room_type = scene.room_type;
    so.ground_truth = ground_truth_object_list(scene);
    save_scene(scene, out / "scenes" / (scene.id + ".json"));
    const auto scene_seed = derive_seed(config.master_seed, fnv1a64(scene.id));

    // Instructions for this scene: a seeded rotation through its room list.
    std::vector<std::string> chosen;
    if (auto it = instructions.find(scene.room_type); it != instructions.end() && !it->second.empty()) {
      const auto& list = it->second;
      Rng rng(derive_seed(scene_seed, 3));
      const auto start = rng.below(list.size());
      for (int k = 0; k < config.instructions_per_scene; ++k)
        chosen.push_back(list[(start + static_cast<std::size_t>(k)) % list.size()]);
    }

    std::optional<Exploration> exploration;
    try {
      exploration = explore_scene(scene, config.strategy, config.camera, config.detector, scene_seed);
      so.image_count = exploration->poses.size();
      so.predicted = exploration->predicted;
      std::ofstream poses_out(out / "poses" / (scene.id + ".ndjson"));
      for (const auto& p : exploration->poses) poses_out << pose_to_json(p).dump() << '\n';
      std::ofstream det_out(out / "detections" / (scene.id + ".ndjson"));
      for (const auto& v : exploration->views) det_out << detections_to_json(v).dump() << '\n';
    } catch (const std::exception& e) {
      so.error = describe_error(e);
    }
    if (chosen.empty() && !so.error)
      so.error = {"invalid_argument", "no instructions for room type " + std::string(to_string(scene.room_type))};

    for (std::size_t k = 0; k < chosen.size(); ++k) {
      ItemOutcome item;
      item.item_id = scene.id + "#" + std::to_string(k);
      item.instruction = chosen[k];
      if (so.error) {
        item.error = so.error;
      } else {
        try {
          item.plan = request_plan(*backend, tmpl, so.predicted, item.instruction, request_options);
          item.validation = validate(*item.plan, so.ground_truth, synonyms, config.rules);
        } catch (const PlanParseError& e) {
          item.error = describe_error(e);
          plans_log << json{{"item_id", item.item_id}, {"raw_text", e.raw_text()}, {"error", error_json(item.error)}}.dump()
                    << '\n';
        } catch (const std::exception& e) {
          item.error = describe_error(e);
        }
      }
      if (item.plan) {
        json steps = json::array();
        for (const auto& st : item.plan->steps) steps.push_back(st.raw);
        plans_log << json{{"item_id", item.item_id},
                          {"scene_id", scene.id},
                          {"instruction", item.instruction},
                          {"raw_text", item.plan->raw_text},
                          {"source", item.plan->source},
                          {"steps", std::move(steps)}}
                         .dump()
                  << '\n';
      }
      if (item.validation) {
        validation_log << report_to_json(*item.validation, item.item_id).dump() << '\n';
        auto_decided.push_back(DecidedItem{scene.room_type, verdict_from_report(item.validation->verdict)});
        EvalItem ei;
        ei.item_id = item.item_id;
        ei.scene_id = scene.id;
        ei.room_type = scene.room_type;
        ei.instruction = item.instruction;
        for (const auto& st : item.plan->steps) ei.plan_steps.push_back(st.raw);
        ei.object_list = so.ground_truth;
        ei.auto_verdict = item.validation->verdict;
        eval_items.push_back(std::move(ei));
      }
      so.items.push_back(std::move(item));
    }
    report.scenes.push_back(std::move(so));
  }

  save_items(eval_items, out / "items.ndjson");
  if (config.evaluation == EvaluationMode::AutoOnly) {
    report.table = aggregate_success(auto_decided);
    if (!auto_decided.empty()) report.breakdown = failure_breakdown(auto_decided);
    report.complete = true;
  } else {
    VoteStore store(out / "votes.ndjson", eval_items);
    const auto decided = store.decided();
    report.table = aggregate_success(decided);
    if (!decided.empty()) report.breakdown = failure_breakdown(decided);
    report.complete = store.pending_count() == 0;
  }

  std::ofstream table_out(out / "success_table.txt");
  table_out << format_success_rows({{config.strategy.criterion_name(), report.table}});
  std::ofstream report_out(out / "report.json");
  report_out << experiment_report_to_json(report).dump(2) << '\n';
  return report;
}

}  // namespace groundplan
