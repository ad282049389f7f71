#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "groundplan/scene.hpp"

namespace gp_test {

inline std::filesystem::path data_dir() { return GROUNDPLAN_TEST_DATA_DIR; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "gp") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline groundplan::Scene empty_room(double w, double h, groundplan::RoomType type = groundplan::RoomType::Kitchen) {
  groundplan::Scene s;
  s.id = "room";
  s.room_type = type;
  s.bounds = {0.0, 0.0, w, h};
  return s;
}

inline groundplan::Scene with_objects(groundplan::Scene s,
                                      std::initializer_list<std::pair<const char*, groundplan::Point>> objects) {
  for (const auto& [name, p] : objects) s.objects.push_back({name, p});
  return s;
}

inline groundplan::SceneGenSpec default_spec(groundplan::RoomType type) {
  groundplan::SceneGenSpec spec;
  spec.room_type = type;
  spec.catalog = groundplan::load_catalog(data_dir() / "catalog.json");
  return spec;
}

}  // namespace gp_test
