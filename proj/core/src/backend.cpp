#include "groundplan/backend.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

#include <httplib.h>

#include "groundplan/errors.hpp"
#include "groundplan/random.hpp"

namespace groundplan {

using nlohmann::json;

json request_to_json(const BackendRequest& r) {
  return json{{"model", r.model}, {"prompt", r.prompt}, {"max_tokens", r.max_tokens}};
}

std::string request_key(const BackendRequest& r) { return hex64(fnv1a64(request_to_json(r).dump())); }

// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(std::string url, std::string api_key)
    : url_(std::move(url)), api_key_(std::move(api_key)) {
  constexpr std::string_view kScheme = "http://";
  if (url_.rfind(kScheme, 0) != 0)
    throw Error(ErrorCode::InvalidArgument, "backend url must start with http://: '" + url_ + "'");
  const auto rest = url_.substr(kScheme.size());
  const auto slash = rest.find('/');
  host_ = std::string(kScheme) + rest.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  if (rest.empty() || slash == 0) throw Error(ErrorCode::InvalidArgument, "backend url has no host");
}

std::unique_ptr<HttpBackend> HttpBackend::from_environment() {
  const char* url = std::getenv("PLAN_BACKEND_URL");
  if (!url || !*url) throw Error(ErrorCode::InvalidArgument, "PLAN_BACKEND_URL is not set");
  const char* key = std::getenv("PLAN_BACKEND_KEY");
  return std::make_unique<HttpBackend>(url, key ? key : "");
}

BackendResponse HttpBackend::complete(const BackendRequest& request,
                                      std::chrono::milliseconds timeout) {
  httplib::Client client(host_);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path_, headers, request_to_json(request).dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= timeout)) {
      throw Error(ErrorCode::Timeout, "backend " + url_ + " timed out after " +
                                          std::to_string(timeout.count()) + " ms");
    }
    throw Error(ErrorCode::Transport, "backend " + url_ + " unreachable: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300)
    throw Error(ErrorCode::BackendStatus,
                "backend " + url_ + " returned status " + std::to_string(res->status));
  try {
    const auto body = json::parse(res->body);
    return BackendResponse{body.at("text").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, "backend " + url_ + " sent a malformed body: " + e.what());
  }
}

// ---------------------------------------------------------------------------

CassetteBackend::CassetteBackend(std::filesystem::path path, Mode mode,
                                 std::shared_ptr<PlanBackend> upstream)
    : path_(std::move(path)), mode_(mode), upstream_(std::move(upstream)) {
  if (mode_ == Mode::Record && !upstream_)
    throw Error(ErrorCode::InvalidArgument, "recording cassette needs an upstream backend");
  std::ifstream in(path_);
  if (!in) {
    if (mode_ == Mode::Replay) throw Error(ErrorCode::Io, "cannot open cassette " + path_.string());
    return;
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      entries_[j.at("key").get<std::string>()] = j.at("response").at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse,
                  path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

BackendResponse CassetteBackend::complete(const BackendRequest& request,
                                          std::chrono::milliseconds timeout) {
  const auto key = request_key(request);
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return BackendResponse{it->second};
    if (mode_ == Mode::Replay)
      throw Error(ErrorCode::NotFound, "cassette " + path_.string() + " has no entry " + key);
  }
  auto response = upstream_->complete(request, timeout);
  std::lock_guard lock(mutex_);
  if (entries_.emplace(key, response.text).second) {
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error(ErrorCode::Io, "cannot append to cassette " + path_.string());
    out << json{{"key", key}, {"request", request_to_json(request)}, {"response", {{"text", response.text}}}}.dump()
        << '\n';
  }
  return response;
}

std::string CassetteBackend::identifier() const {
  return "cassette:" + path_.filename().string();
}

std::size_t CassetteBackend::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------

namespace {

bool mentions(const std::string& haystack, const std::string& word) {
  for (auto pos = haystack.find(word); pos != std::string::npos; pos = haystack.find(word, pos + 1)) {
    const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack[pos - 1]));
    const auto end = pos + word.size();
    const bool right = end >= haystack.size() || !std::isalnum(static_cast<unsigned char>(haystack[end]));
    if (left && right) return true;
  }
  return false;
}

}  // namespace

BackendResponse ScriptedBackend::complete(const BackendRequest& request, std::chrono::milliseconds) {
  const auto& prompt = request.prompt;
  const auto open = prompt.find('[');
  const auto close = prompt.find(']', open == std::string::npos ? 0 : open);
  if (open == std::string::npos || close == std::string::npos) return BackendResponse{""};
  std::vector<std::string> objects;
  std::string current;
  for (char c : prompt.substr(open + 1, close - open - 1)) {
    if (c == ',') {
      objects.push_back(normalize_class_name(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!normalize_class_name(current).empty()) objects.push_back(normalize_class_name(current));
  if (objects.empty()) return BackendResponse{"I cannot find any objects to work with."};

  std::string tail = prompt.substr(close + 1);
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::vector<std::string> targets;
  for (const auto& o : objects) {
    if (mentions(tail, o)) targets.push_back(o);
    if (targets.size() == 2) break;
  }
  if (targets.empty()) targets.push_back(objects.front());

  std::string text;
  int n = 0;
  for (const auto& t : targets) {
    text += "Step " + std::to_string(++n) + ". Move to the " + t + "\n";
    text += "Step " + std::to_string(++n) + ". Grasp the " + t + "\n";
    text += "Step " + std::to_string(++n) + ". Place the " + t + "\n";
  }
  return BackendResponse{text};
}

// ---------------------------------------------------------------------------

Plan request_plan(PlanBackend& backend, const PromptTemplate& tmpl, const ObjectList& objects,
                  const std::string& instruction, const PlanRequestOptions& options) {
  BackendRequest request{options.model, build_prompt(tmpl, objects, instruction), options.max_tokens};
  auto response = backend.complete(request, options.timeout);
  if (std::all_of(response.text.begin(), response.text.end(),
                  [](unsigned char c) { return std::isspace(c); }))
    throw Error(ErrorCode::EmptyCompletion, "backend " + backend.identifier() + " returned an empty completion");
  Plan plan;
  plan.instruction = instruction;
  plan.raw_text = response.text;
  plan.source = backend.identifier();
  plan.steps = parse_plan_text(plan.raw_text);
  return plan;
}

}  // namespace groundplan
