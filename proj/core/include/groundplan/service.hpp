#pragma once

#include <memory>
#include <string>

#include "groundplan/experiment.hpp"

namespace groundplan {

/// HTTP front end over the pipeline and the annotation store. Scenes come
/// from the config; annotation items from <output_dir>/items.ndjson when a
/// run has produced it; votes go to <output_dir>/votes.ndjson.
class Service {
 public:
  /// Throws Error{Storage} when the existing vote log is corrupt.
  explicit Service(ExperimentConfig config, std::shared_ptr<PlanBackend> backend = nullptr);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Returns the bound port. Throws Error{Io} on bind failure.
  int bind(const std::string& host, int port);
  int bind_to_any_port(const std::string& host = "127.0.0.1");
  /// Blocks until stop() is called.
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Binds, serves until the process receives SIGINT/SIGTERM, then shuts down.
void serve(const ExperimentConfig& config, const std::string& host, int port);

}  // namespace groundplan
