#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "groundplan/plan.hpp"
#include "groundplan/prompt.hpp"
#include "groundplan/scene.hpp"

namespace groundplan {

inline constexpr int kDefaultMaxTokens = 512;

struct BackendRequest {
  std::string model = "default";
  std::string prompt;
  int max_tokens = kDefaultMaxTokens;
};

struct BackendResponse {
  std::string text;
};

nlohmann::json request_to_json(const BackendRequest& request);
/// Stable key for a request: hex FNV-1a of its canonical JSON encoding.
std::string request_key(const BackendRequest& request);

/// One blocking text-completion exchange.
class PlanBackend {
 public:
  virtual ~PlanBackend() = default;
  virtual BackendResponse complete(const BackendRequest& request,
                                   std::chrono::milliseconds timeout) = 0;
  virtual std::string identifier() const = 0;
};

/// POSTs {model, prompt, max_tokens} as JSON and expects {text}. Only plain
/// http:// endpoints are supported.
class HttpBackend : public PlanBackend {
 public:
  explicit HttpBackend(std::string url, std::string api_key = {});

  /// Reads PLAN_BACKEND_URL and PLAN_BACKEND_KEY.
  static std::unique_ptr<HttpBackend> from_environment();

  BackendResponse complete(const BackendRequest& request, std::chrono::milliseconds timeout) override;
  std::string identifier() const override { return "http:" + url_; }
  const std::string& url() const { return url_; }

 private:
  std::string url_;
  std::string api_key_;
  std::string host_;
  std::string path_;
};

/// Record/replay of backend exchanges keyed by request_key(). In Replay mode
/// a missing key is an error; in Record mode misses go upstream and are
/// appended to the cassette file.
class CassetteBackend : public PlanBackend {
 public:
  enum class Mode { Replay, Record };

  CassetteBackend(std::filesystem::path path, Mode mode,
                  std::shared_ptr<PlanBackend> upstream = nullptr);

  BackendResponse complete(const BackendRequest& request, std::chrono::milliseconds timeout) override;
  std::string identifier() const override;
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  Mode mode_;
  std::shared_ptr<PlanBackend> upstream_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> entries_;
};

/// Offline stand-in: writes a short move/grasp plan for the listed objects
/// the instruction mentions. Deterministic; useful for demos and smoke runs.
class ScriptedBackend : public PlanBackend {
 public:
  BackendResponse complete(const BackendRequest& request, std::chrono::milliseconds timeout) override;
  std::string identifier() const override { return "scripted"; }
};

struct PlanRequestOptions {
  std::string model = "default";
  int max_tokens = kDefaultMaxTokens;
  std::chrono::milliseconds timeout{30000};
};

/// Builds the prompt, performs one exchange and parses the completion.
/// Throws Error{EmptyCompletion} for blank text and PlanParseError when the
/// completion has no step lines.
Plan request_plan(PlanBackend& backend, const PromptTemplate& tmpl, const ObjectList& objects,
                  const std::string& instruction, const PlanRequestOptions& options = {});

}  // namespace groundplan
