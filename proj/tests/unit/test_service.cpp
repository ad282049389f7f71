#include <doctest.h>

#include <fstream>
#include <thread>

#include <httplib.h>

#include "fixtures.hpp"
#include "groundplan/errors.hpp"
#include "groundplan/experiment.hpp"
#include "groundplan/service.hpp"

using namespace groundplan;
using nlohmann::json;

namespace {

ExperimentConfig service_config(const gp_test::TempDir& dir, int scenes = 3) {
  auto c = default_experiment_config();
  c.master_seed = 21;
  c.scenes.count = scenes;
  c.scenes.seed = 21;
  c.output_dir = dir / "out";
  return c;
}

/// Runs a Service on an ephemeral port for the lifetime of the object.
class Running {
 public:
  explicit Running(ExperimentConfig config) : service_(std::move(config)) {
    port_ = service_.bind_to_any_port();
    thread_ = std::thread([this] { service_.listen(); });
    service_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  ~Running() {
    service_.stop();
    thread_.join();
  }

  std::pair<int, json> get(const std::string& path, const httplib::Headers& headers = {}) {
    auto res = client_->Get(path, headers);
    REQUIRE(res);
    return {res->status, res->body.empty() ? json() : json::parse(res->body)};
  }
  std::pair<int, json> post(const std::string& path, const std::string& body, const httplib::Headers& headers = {}) {
    auto res = client_->Post(path, headers, body, "application/json");
    REQUIRE(res);
    return {res->status, json::parse(res->body)};
  }
  std::pair<int, json> post(const std::string& path, const json& body, const httplib::Headers& headers = {}) {
    return post(path, body.dump(), headers);
  }

 private:
  Service service_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

void check_error(const std::pair<int, json>& r, int status, const std::string& code) {
  CHECK(r.first == status);
  CHECK(r.second.at("code") == code);
  CHECK(r.second.at("message").is_string());
}

json vote(const std::string& item, const std::string& who, const std::string& verdict,
          const std::optional<std::string>& type = std::nullopt) {
  json v{{"item_id", item}, {"annotator_id", who}, {"verdict", verdict}};
  if (type) v["failure_type"] = *type;
  return v;
}

}  // namespace

TEST_CASE("service: scenes") {
  gp_test::TempDir dir;
  Running svc(service_config(dir));
  const auto [status, list] = svc.get("/api/scenes");
  CHECK(status == 200);
  REQUIRE(list.size() == 3);
  CHECK(list[0].at("id") == "scene0-kitchen");
  const auto id = list[1].at("id").get<std::string>();
  const auto [s2, scene] = svc.get("/api/scenes/" + id);
  CHECK(s2 == 200);
  CHECK(scene.at("id") == id);
  CHECK(scene.at("objects").size() == list[1].at("object_count"));
  check_error(svc.get("/api/scenes/nope"), 404, "not_found");
  check_error(svc.get("/api/nothing-here"), 404, "not_found");
}

TEST_CASE("service: explore") {
  gp_test::TempDir dir;
  Running svc(service_config(dir));
  const json body{{"scene_id", "scene0-kitchen"},
                  {"strategy", {{"criterion", "center"}, {"grid", 0.75}, {"unit_angle_deg", 60}}}};
  const auto [status, out] = svc.post("/api/explore", body);
  CHECK(status == 200);
  CHECK(out.at("image_count") == 6);
  CHECK(out.at("poses").size() == 6);
  CHECK(out.at("detections").size() == 6);
  CHECK(svc.post("/api/explore", body).second == out);
  check_error(svc.post("/api/explore", json{{"scene_id", "ghost"}}), 404, "not_found");
  check_error(svc.post("/api/explore", std::string("{not json")), 400, "parse_error");
  check_error(svc.post("/api/explore", json{{"scene_id", "scene0-kitchen"}, {"strategy", {{"criterion", "center"}, {"grid", -1}}}}),
              400, "invalid_argument");
}

TEST_CASE("service: plans and validation") {
  gp_test::TempDir dir;
  Running svc(service_config(dir));
  const auto [status, plan] =
      svc.post("/api/plans", json{{"instruction", "Clean the sink"}, {"object_list", {"sponge", "sink", "towel"}}});
  CHECK(status == 200);
  CHECK(plan.at("steps").size() == 3);
  CHECK(plan.at("steps")[0].at("verb") == "MOVE");
  CHECK(plan.at("source") == "scripted");

  const auto from_scene = svc.post("/api/plans", json{{"instruction", "Tidy up"}, {"scene_id", "scene1-living_room"}});
  CHECK(from_scene.first == 200);
  check_error(svc.post("/api/plans", json{{"object_list", {"a"}}}), 400, "parse_error");

  const auto [vs, report] = svc.post("/api/validate", json{{"plan_text", "Step 1. Grasp the doorknob\nStep 2. Move to the door"},
                                                           {"object_list", {"door", "doorknob"}},
                                                           {"rules", "strict"},
                                                           {"plan_id", "p7"}});
  CHECK(vs == 200);
  CHECK(report.at("plan_id") == "p7");
  CHECK(report.at("verdict") == "counterfactual");
  CHECK(report.at("first_failure_step") == 1);

  const auto lenient = svc.post("/api/validate", json{{"steps", {"Step 1. Grasp the doorknob", "Step 2. Move to the door"}},
                                                      {"object_list", {"door", "doorknob"}}});
  CHECK(lenient.second.at("verdict") == "success");
  check_error(svc.post("/api/validate", json{{"plan_text", "hello"}, {"object_list", {"door"}}}), 400, "parse_failure");
  check_error(svc.post("/api/validate", json{{"plan_text", "Step 1. Open it"}}), 400, "invalid_argument");
  check_error(svc.post("/api/validate", json{{"plan_text", "Step 1. Open it"}, {"object_list", {"door"}}, {"rules", "x"}}),
              400, "invalid_argument");
}

TEST_CASE("service: annotation flow") {
  gp_test::TempDir dir;
  auto config = service_config(dir);
  run_experiment(config);  // produces items.ndjson: 3 items
  Running svc(config);

  const auto before = svc.get("/api/reports/success").second;
  CHECK(before.at("complete") == false);
  CHECK(before.at("pending") == 3);
  CHECK(before.at("decided") == 0);
  CHECK(svc.get("/api/reports/failures").second.at("breakdown").is_null());

  check_error(svc.get("/api/annotations/queue"), 400, "invalid_argument");
  const auto first = svc.get("/api/annotations/queue?annotator=ann1").second;
  REQUIRE(first.at("item").is_object());
  const auto item_id = first.at("item").at("item_id").get<std::string>();
  CHECK(first.at("item").at("object_list").is_array());
  CHECK(first.at("pending") == 3);

  const auto ack = svc.post("/api/annotations", vote(item_id, "ann1", "success"));
  CHECK(ack.first == 201);
  CHECK(ack.second.at("votes") == 1);
  CHECK_FALSE(ack.second.contains("verdict"));
  check_error(svc.post("/api/annotations", vote(item_id, "ann1", "failure", "hallucination")), 409, "duplicate_vote");
  check_error(svc.post("/api/annotations", vote("nope#0", "ann1", "success")), 404, "unknown_item");
  check_error(svc.post("/api/annotations", vote(item_id, "ann2", "failure")), 400, "validation_error");

  // The item left ann1's queue but not ann2's.
  CHECK(svc.get("/api/annotations/queue?annotator=ann1").second.at("item").at("item_id") != item_id);
  CHECK(svc.get("/api/annotations/queue", {{"X-Annotator-Id", "ann2"}}).second.at("item").at("item_id") == item_id);

  // Annotator from the header when the body omits it.
  json headerless{{"item_id", item_id}, {"verdict", "failure"}, {"failure_type", "hallucination"}};
  CHECK(svc.post("/api/annotations", headerless, {{"X-Annotator-Id", "ann2"}}).first == 201);
  const auto third = svc.post("/api/annotations", vote(item_id, "ann3", "failure", "hallucination"));
  CHECK(third.first == 201);
  CHECK(third.second.at("votes") == 3);
  CHECK(third.second.at("verdict") == "failure");
  CHECK(third.second.at("failure_type") == "hallucination");
  check_error(svc.post("/api/annotations", vote(item_id, "ann4", "success")), 409, "item_complete");

  // Finish every other item with success votes.
  for (const auto* who : {"a", "b", "c"}) {
    for (;;) {
      const auto q = svc.get(std::string("/api/annotations/queue?annotator=") + who).second;
      if (q.at("item").is_null()) break;
      CHECK(svc.post("/api/annotations", vote(q.at("item").at("item_id"), who, "success")).first == 201);
    }
  }
  const auto done = svc.get("/api/reports/success").second;
  CHECK(done.at("complete") == true);
  CHECK(done.at("decided") == 3);
  CHECK(done.at("text").get<std::string>().find("Avg.") != std::string::npos);
  const auto failures = svc.get("/api/reports/failures").second;
  CHECK(failures.at("breakdown").at("hallucination") == doctest::Approx(33.33));
}

TEST_CASE("service: votes persist across restarts") {
  gp_test::TempDir dir;
  auto config = service_config(dir, 2);
  run_experiment(config);
  std::string item_id;
  {
    Running svc(config);
    item_id = svc.get("/api/annotations/queue?annotator=x").second.at("item").at("item_id");
    CHECK(svc.post("/api/annotations", vote(item_id, "x", "success")).first == 201);
  }
  Running svc(config);
  check_error(svc.post("/api/annotations", vote(item_id, "x", "success")), 409, "duplicate_vote");
}

TEST_CASE("service: corrupt vote log is refused at startup") {
  gp_test::TempDir dir;
  auto config = service_config(dir, 1);
  std::filesystem::create_directories(config.output_dir);
  std::ofstream(config.output_dir / "votes.ndjson") << "garbage\n";
  try {
    Service s(config);
    FAIL("expected a storage error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Storage);
  }
}

TEST_CASE("service: empty queue before any run") {
  gp_test::TempDir dir;
  Running svc(service_config(dir));
  const auto q = svc.get("/api/annotations/queue?annotator=a").second;
  CHECK(q.at("item").is_null());
  CHECK(q.at("pending") == 0);
  CHECK(svc.get("/api/reports/success").second.at("complete") == false);
}
