#include "groundplan/service.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <thread>

#include <httplib.h>

#include "groundplan/errors.hpp"
#include "groundplan/prompt.hpp"
#include "groundplan/random.hpp"

namespace groundplan {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse:
    case ErrorCode::Validation:
    case ErrorCode::PlanParse:
    case ErrorCode::EmptyCompletion: return 400;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownItem: return 404;
    case ErrorCode::DuplicateVote:
    case ErrorCode::ItemComplete: return 409;
    case ErrorCode::Transport:
    case ErrorCode::BackendStatus: return 502;
    case ErrorCode::Timeout: return 504;
    default: return 500;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, json{{"code", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  try {
    auto doc = json::parse(req.body);
    if (!doc.is_object()) throw Error(ErrorCode::Parse, "request body must be an object");
    return doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("request body: ") + e.what());
  }
}

std::string annotator_of(const httplib::Request& req, const json* body = nullptr) {
  if (body && body->contains("annotator_id")) return body->at("annotator_id").get<std::string>();
  if (req.has_param("annotator")) return req.get_param_value("annotator");
  if (req.has_header("X-Annotator-Id")) return req.get_header_value("X-Annotator-Id");
  return {};
}

json step_to_json(const ActionStep& step) {
  return json{{"index", step.index},
              {"verb", std::string(to_string(step.verb))},
              {"text", step.text},
              {"raw", step.raw},
              {"objects", step.phrase_texts()}};
}

}  // namespace

struct Service::Impl {
  ExperimentConfig config;
  std::shared_ptr<PlanBackend> backend;
  std::vector<Scene> scenes;
  SynonymTable synonyms;
  PromptTemplate tmpl;
  std::unique_ptr<VoteStore> store;
  httplib::Server server;

  const Scene& scene(const std::string& id) const {
    for (const auto& s : scenes)
      if (s.id == id) return s;
    throw Error(ErrorCode::NotFound, "scene '" + id + "' not found");
  }

  std::uint64_t scene_seed(const Scene& s) const { return derive_seed(config.master_seed, fnv1a64(s.id)); }

  ObjectList object_list_from(const json& body) const {
    if (body.contains("object_list")) return ObjectList::from_names(body.at("object_list").get<std::vector<std::string>>());
    if (body.contains("scene_id")) return ground_truth_object_list(scene(body.at("scene_id").get<std::string>()));
    throw Error(ErrorCode::InvalidArgument, "object_list or scene_id is required");
  }

  json explore(const json& body) {
    const auto& s = scene(body.at("scene_id").get<std::string>());
    const auto strategy = body.contains("strategy") ? strategy_from_json(body.at("strategy")) : config.strategy;
    strategy.validate();
    const auto camera = body.contains("camera") ? camera_from_json(body.at("camera")) : config.camera;
    const auto detector = body.contains("detector") ? detector_from_json(body.at("detector")) : config.detector;
    const auto seed = body.value("seed", scene_seed(s));
    const auto e = explore_scene(s, strategy, camera, detector, seed);
    json poses = json::array();
    for (const auto& p : e.poses) poses.push_back(pose_to_json(p));
    json views = json::array();
    for (const auto& v : e.views) views.push_back(detections_to_json(v));
    return json{{"scene_id", s.id},
                {"image_count", e.poses.size()},
                {"poses", std::move(poses)},
                {"detections", std::move(views)},
                {"object_list", e.predicted.names()}};
  }

  json plan(const json& body) {
    const auto instruction = body.at("instruction").get<std::string>();
    ObjectList objects;
    if (body.contains("object_list")) {
      objects = object_list_from(body);
    } else {
      const auto& s = scene(body.at("scene_id").get<std::string>());
      objects = explore_scene(s, config.strategy, config.camera, config.detector, scene_seed(s)).predicted;
    }
    const PlanRequestOptions options{config.backend.model, config.backend.max_tokens, config.backend.timeout};
    const auto p = request_plan(*backend, tmpl, objects, instruction, options);
    json steps = json::array();
    for (const auto& st : p.steps) steps.push_back(step_to_json(st));
    return json{{"instruction", p.instruction},
                {"object_list", objects.names()},
                {"raw_text", p.raw_text},
                {"source", p.source},
                {"steps", std::move(steps)}};
  }

  json validate_plan(const json& body) {
    const auto objects = object_list_from(body);
    std::string text;
    if (body.contains("plan_text")) {
      text = body.at("plan_text").get<std::string>();
    } else {
      for (const auto& line : body.at("steps")) text += line.get<std::string>() + "\n";
    }
    Plan p;
    p.instruction = body.value("instruction", std::string());
    p.raw_text = text;
    p.steps = parse_plan_text(text);
    p.source = "request";
    auto rules = config.rules;
    if (body.contains("rules"))
      rules = parse_rule_mode(body.at("rules").get<std::string>()) == RuleMode::Strict ? RuleSet::strict()
                                                                                        : RuleSet::lenient();
    return report_to_json(validate(p, objects, synonyms, rules), body.value("plan_id", std::string("request")));
  }

  json success_report() const {
    const auto decided = store->decided();
    const auto table = aggregate_success(decided);
    // Totals per room include undecided items so the UI can show progress.
    json totals = json::object();
    for (const auto& item : store->items()) totals[std::string(to_string(item.room_type))] = 0;
    for (const auto& item : store->items()) {
      auto& t = totals[std::string(to_string(item.room_type))];
      t = t.get<int>() + 1;
    }
    const auto pending = store->pending_count();
    return json{{"complete", pending == 0 && !store->items().empty()},
                {"pending", pending},
                {"decided", decided.size()},
                {"items", store->items().size()},
                {"totals", std::move(totals)},
                {"table", table_to_json(table)},
                {"text", format_success_rows({{"votes", table}})}};
  }

  void routes() {
    auto handle = [](auto fn) {
      return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
          fn(req, res);
        } catch (const Error& e) {
          send_error(res, http_status(e.code()), to_string(e.code()), e.what());
        } catch (const json::exception& e) {
          send_error(res, 400, to_string(ErrorCode::Parse), e.what());
        } catch (const std::exception& e) {
          send_error(res, 500, "internal", e.what());
        }
      };
    };

    server.Get("/api/scenes", handle([this](const httplib::Request&, httplib::Response& res) {
      json out = json::array();
      for (const auto& s : scenes)
        out.push_back(json{{"id", s.id},
                           {"room_type", std::string(to_string(s.room_type))},
                           {"object_count", s.objects.size()},
                           {"width", s.bounds.width()},
                           {"height", s.bounds.height()}});
      send_json(res, 200, out);
    }));
    server.Get(R"(/api/scenes/([^/]+))", handle([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, scene_to_json(scene(req.matches[1].str())));
    }));
    server.Post("/api/explore", handle([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, explore(parse_body(req)));
    }));
    server.Post("/api/plans", handle([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, plan(parse_body(req)));
    }));
    server.Post("/api/validate", handle([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, validate_plan(parse_body(req)));
    }));
    server.Get("/api/annotations/queue", handle([this](const httplib::Request& req, httplib::Response& res) {
      const auto annotator = annotator_of(req);
      if (annotator.empty()) throw Error(ErrorCode::InvalidArgument, "annotator is required");
      const auto next = store->next_for(annotator);
      send_json(res, 200,
                json{{"item", next ? item_to_json(*next) : json(nullptr)}, {"pending", store->pending_count()}});
    }));
    server.Post("/api/annotations", handle([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      auto doc = body;
      doc["annotator_id"] = annotator_of(req, &body);
      if (!doc.contains("timestamp"))
        doc["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                               std::chrono::system_clock::now().time_since_epoch())
                               .count();
      const auto vote = vote_from_json(doc);
      store->record(vote);
      const auto votes = store->votes_for(vote.item_id);
      json ack{{"item_id", vote.item_id}, {"votes", votes.size()}};
      if (votes.size() == kVotesPerItem) {
        const auto v = majority_verdict(votes);
        ack["verdict"] = std::string(to_string(v.verdict));
        ack["failure_type"] = v.failure_type ? json(std::string(to_string(*v.failure_type))) : json(nullptr);
      }
      send_json(res, 201, ack);
    }));
    server.Get("/api/reports/success", handle([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, success_report());
    }));
    server.Get("/api/reports/failures", handle([this](const httplib::Request&, httplib::Response& res) {
      const auto decided = store->decided();
      send_json(res, 200,
                json{{"decided", decided.size()},
                     {"pending", store->pending_count()},
                     {"breakdown", decided.empty() ? json(nullptr) : breakdown_to_json(failure_breakdown(decided))}});
    }));
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "not_found" : "http_error", "no such route");
    });
  }
};

Service::Service(ExperimentConfig config, std::shared_ptr<PlanBackend> backend) : impl_(std::make_unique<Impl>()) {
  auto& m = *impl_;
  m.config = std::move(config);
  m.backend = backend ? std::move(backend) : make_backend(m.config.backend);
  m.scenes = load_scenes(m.config);
  m.synonyms = SynonymTable::load(m.config.synonyms_path);
  m.tmpl = load_template(m.config.template_path, PromptMode::Inference);
  const auto items_path = m.config.output_dir / "items.ndjson";
  std::vector<EvalItem> items = fs::exists(items_path) ? load_items(items_path) : std::vector<EvalItem>{};
  fs::create_directories(m.config.output_dir);
  m.store = std::make_unique<VoteStore>(m.config.output_dir / "votes.ndjson", std::move(items));
  m.routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port))
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

int Service::bind_to_any_port(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port <= 0) throw Error(ErrorCode::Io, "cannot bind " + host);
  return port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

namespace {
std::atomic<bool> g_stop_requested{false};
extern "C" void on_signal(int) { g_stop_requested = true; }
}  // namespace

void serve(const ExperimentConfig& config, const std::string& host, int port) {
  Service service(config);
  service.bind(host, port);
  g_stop_requested = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread watcher([&service] {
    while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service.stop();
  });
  service.listen();
  g_stop_requested = true;
  watcher.join();
}

}  // namespace groundplan
