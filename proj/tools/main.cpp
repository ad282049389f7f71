// groundplan command-line tool. Each subcommand wraps one library call.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "groundplan/dataset.hpp"
#include "groundplan/errors.hpp"
#include "groundplan/experiment.hpp"
#include "groundplan/prompt.hpp"
#include "groundplan/random.hpp"
#include "groundplan/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace groundplan;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ExperimentConfig resolve_config(const Globals& g) {
  ExperimentConfig c = g.config.empty() ? default_experiment_config() : load_experiment_config(g.config);
  if (g.seed) {
    c.master_seed = *g.seed;
    if (!c.scenes.directory) c.scenes.seed = *g.seed;
  }
  if (!g.out.empty()) c.output_dir = g.out;
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Scene> scenes_from(const std::string& dir, const ExperimentConfig& config) {
  return dir.empty() ? load_scenes(config) : load_scene_directory(dir);
}

ObjectList objects_from(const std::string& scene_path, const std::string& objects) {
  if (!scene_path.empty()) return ground_truth_object_list(load_scene(scene_path));
  std::vector<std::string> names;
  std::stringstream ss(objects);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) names.push_back(item);
  if (names.empty()) throw Error(ErrorCode::InvalidArgument, "give --scene or --objects");
  return ObjectList::from_names(names);
}

void write_scenes(const std::vector<Scene>& scenes, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& s : scenes) save_scene(s, dir / (s.id + ".json"));
  std::cout << "wrote " << scenes.size() << " scenes to " << dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"groundplan: explore scenes, ground plans, evaluate"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output directory");

  auto* gen = app.add_subcommand("gen-scenes", "Generate synthetic scenes");
  int gen_count = 0;
  gen->add_option("--count", gen_count, "Number of scenes (default from config)");

  auto* explore = app.add_subcommand("explore", "Plan camera poses and detect objects in one scene");
  std::string explore_scene_path, explore_criterion;
  double explore_grid = 0.0, explore_angle = 0.0;
  explore->add_option("--scene", explore_scene_path, "Scene file")->required()->check(CLI::ExistingFile);
  explore->add_option("--criterion", explore_criterion, "traversal|random|center|blockwise");
  explore->add_option("--grid", explore_grid, "Grid side length in metres");
  explore->add_option("--angle", explore_angle, "Unit rotation angle in degrees");

  auto* plan = app.add_subcommand("plan", "Request a plan from the backend");
  std::string plan_scene, plan_objects, plan_instruction;
  plan->add_option("--scene", plan_scene, "Scene file (its ground-truth list is used)");
  plan->add_option("--objects", plan_objects, "Comma-separated object list");
  plan->add_option("--instruction", plan_instruction, "Instruction")->required();

  auto* validate_cmd = app.add_subcommand("validate", "Validate a plan text against an object list");
  std::string val_plan, val_scene, val_objects, val_rules;
  validate_cmd->add_option("--plan", val_plan, "Plan text file")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--scene", val_scene, "Scene file");
  validate_cmd->add_option("--objects", val_objects, "Comma-separated object list");
  validate_cmd->add_option("--rules", val_rules, "strict|lenient");

  auto* augment = app.add_subcommand("augment", "Expand scenes by object substitution");
  std::string aug_scenes;
  int aug_factor = 80;
  double aug_prob = 0.5;
  augment->add_option("--scenes", aug_scenes, "Scene directory (default: config scenes)");
  augment->add_option("--factor", aug_factor, "Scenes per source scene, source included");
  augment->add_option("--prob", aug_prob, "Per-object substitution probability");

  auto* split = app.add_subcommand("split", "Stratified train/eval split");
  std::string split_scenes_dir;
  double split_fraction = 0.8;
  split->add_option("--scenes", split_scenes_dir, "Scene directory (default: config scenes)");
  split->add_option("--train-fraction", split_fraction, "Training fraction per room type");

  auto* run = app.add_subcommand("run", "Run the full pipeline");

  auto* evaluate = app.add_subcommand("evaluate", "Aggregate votes into a success table");
  std::string eval_items, eval_votes;
  evaluate->add_option("--items", eval_items, "Items file (default <out>/items.ndjson)");
  evaluate->add_option("--votes", eval_votes, "Vote log (default <out>/votes.ndjson)");

  auto* report = app.add_subcommand("report", "Print the tables of a finished run");
  std::string report_path;
  report->add_option("--report", report_path, "report.json (default <out>/report.json)");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port");

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = resolve_config(g);
    const fs::path out = config.output_dir;

    if (gen->parsed()) {
      if (gen_count > 0) config.scenes.count = gen_count;
      config.scenes.directory.reset();
      write_scenes(load_scenes(config), out / "scenes");
    } else if (explore->parsed()) {
      const auto scene = load_scene(explore_scene_path);
      auto strategy = config.strategy;
      if (!explore_criterion.empty() || explore_grid > 0 || explore_angle > 0) {
        auto doc = strategy_to_json(strategy);
        if (!explore_criterion.empty()) doc["criterion"] = explore_criterion;
        if (explore_grid > 0) doc["grid"] = explore_grid;
        if (explore_angle > 0) doc["unit_angle_deg"] = explore_angle;
        strategy = strategy_from_json(doc);
      }
      strategy.validate();
      const auto e = explore_scene(scene, strategy, config.camera, config.detector,
                                   derive_seed(config.master_seed, fnv1a64(scene.id)));
      json views = json::array();
      for (const auto& v : e.views) views.push_back(detections_to_json(v));
      std::cout << json{{"scene_id", scene.id},
                        {"image_count", e.poses.size()},
                        {"object_list", e.predicted.names()},
                        {"views", std::move(views)}}
                       .dump(2)
                << "\n";
    } else if (plan->parsed()) {
      const auto objects = objects_from(plan_scene, plan_objects);
      auto backend = make_backend(config.backend);
      const auto tmpl = load_template(config.template_path, PromptMode::Inference);
      const auto p = request_plan(*backend, tmpl, objects, plan_instruction,
                                  {config.backend.model, config.backend.max_tokens, config.backend.timeout});
      std::cout << render_steps(p.steps);
    } else if (validate_cmd->parsed()) {
      const auto objects = objects_from(val_scene, val_objects);
      Plan p;
      p.raw_text = read_file(val_plan);
      p.steps = parse_plan_text(p.raw_text);
      auto rules = config.rules;
      if (!val_rules.empty())
        rules = parse_rule_mode(val_rules) == RuleMode::Strict ? RuleSet::strict() : RuleSet::lenient();
      const auto r = validate(p, objects, SynonymTable::load(config.synonyms_path), rules);
      std::cout << report_to_json(r, fs::path(val_plan).stem().string()).dump(2) << "\n";
      return r.verdict == Verdict::Success ? 0 : 3;
    } else if (augment->parsed()) {
      const auto scenes = scenes_from(aug_scenes, config);
      write_scenes(expand_scenes(scenes, aug_factor, aug_prob, config.master_seed), out / "augmented");
    } else if (split->parsed()) {
      const auto scenes = scenes_from(split_scenes_dir, config);
      const auto s = split_scenes(scenes, split_fraction, config.master_seed);
      json doc{{"train", json::array()}, {"eval", json::array()}};
      for (const auto& sc : s.train) doc["train"].push_back(sc.id);
      for (const auto& sc : s.eval) doc["eval"].push_back(sc.id);
      fs::create_directories(out);
      std::ofstream(out / "split.json") << doc.dump(2) << "\n";
      std::cout << "train " << s.train.size() << ", eval " << s.eval.size() << "\n";
    } else if (run->parsed()) {
      const auto r = run_experiment(config);
      std::cout << format_success_rows({{config.strategy.criterion_name(), r.table}});
      for (const auto& w : r.table.warnings) std::cerr << "warning: " << w << "\n";
      if (!r.complete) std::cout << "(incomplete: waiting for votes)\n";
      std::cout << "report: " << (out / "report.json").string() << "\n";
    } else if (evaluate->parsed()) {
      const auto items = load_items(eval_items.empty() ? out / "items.ndjson" : fs::path(eval_items));
      VoteStore store(eval_votes.empty() ? out / "votes.ndjson" : fs::path(eval_votes), items);
      const auto decided = store.decided();
      std::cout << format_success_rows({{"votes", aggregate_success(decided)}});
      if (!decided.empty()) std::cout << breakdown_to_json(failure_breakdown(decided)).dump() << "\n";
      std::cout << "pending items: " << store.pending_count() << "\n";
    } else if (report->parsed()) {
      const fs::path file = report_path.empty() ? out / "report.json" : fs::path(report_path);
      const auto doc = json::parse(read_file(file.string()));
      std::cout << read_file((file.parent_path() / "success_table.txt").string());
      std::cout << "failures: " << doc.at("failure_breakdown").dump() << "\n";
      std::cout << "complete: " << (doc.at("complete").get<bool>() ? "yes" : "no") << "\n";
    } else if (serve_cmd->parsed()) {
      std::cerr << "serving on " << host << ":" << port << "\n";
      serve(config, host, port);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
