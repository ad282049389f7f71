#include "groundplan/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "groundplan/errors.hpp"

namespace groundplan {

using nlohmann::json;

std::string_view to_string(RoomType type) {
  switch (type) {
    case RoomType::Kitchen: return "kitchen";
    case RoomType::LivingRoom: return "living_room";
    case RoomType::Bedroom: return "bedroom";
    case RoomType::Bathroom: return "bathroom";
  }
  return "kitchen";
}

RoomType parse_room_type(std::string_view text) {
  std::string key;
  for (char c : text) {
    if (c == '_' || c == ' ' || c == '-') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "kitchen") return RoomType::Kitchen;
  if (key == "livingroom" || key == "living") return RoomType::LivingRoom;
  if (key == "bedroom") return RoomType::Bedroom;
  if (key == "bathroom") return RoomType::Bathroom;
  throw Error(ErrorCode::Validation, "room_type: unknown value '" + std::string(text) + "'");
}

std::string_view short_label(RoomType type) {
  switch (type) {
    case RoomType::Kitchen: return "Kit.";
    case RoomType::LivingRoom: return "Living.";
    case RoomType::Bedroom: return "Bed.";
    case RoomType::Bathroom: return "Bath.";
  }
  return "?";
}

std::string normalize_class_name(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    const auto uc = static_cast<unsigned char>(c);
    if (c == '_' || std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

// ---------------------------------------------------------------------------

ObjectList ObjectList::from_names(std::span<const std::string> names) {
  ObjectList list;
  list.names_.reserve(names.size());
  for (const auto& n : names) {
    auto norm = normalize_class_name(n);
    if (!norm.empty()) list.names_.push_back(std::move(norm));
  }
  std::sort(list.names_.begin(), list.names_.end());
  list.names_.erase(std::unique(list.names_.begin(), list.names_.end()), list.names_.end());
  return list;
}

ObjectList ObjectList::from_names(std::initializer_list<std::string_view> names) {
  std::vector<std::string> tmp(names.begin(), names.end());
  return from_names(std::span<const std::string>(tmp));
}

bool ObjectList::contains(std::string_view name) const {
  return std::binary_search(names_.begin(), names_.end(), name);
}

ObjectList ObjectList::merged(const ObjectList& other) const {
  ObjectList out;
  out.names_.reserve(names_.size() + other.names_.size());
  std::set_union(names_.begin(), names_.end(), other.names_.begin(), other.names_.end(),
                 std::back_inserter(out.names_));
  return out;
}

std::string ObjectList::render() const {
  std::string out = "[";
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (i) out += ", ";
    out += names_[i];
  }
  out += "]";
  return out;
}

// ---------------------------------------------------------------------------

bool Scene::is_achievable(Point p) const {
  if (!bounds.contains(p)) return false;
  return std::none_of(obstacles.begin(), obstacles.end(),
                      [&](const Rect& r) { return r.contains_strictly(p); });
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::Validation, what); }

std::string describe(Point p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

json rect_to_json(const Rect& r) {
  return json{{"x_min", r.x_min}, {"y_min", r.y_min}, {"x_max", r.x_max}, {"y_max", r.y_max}};
}

Rect rect_from_json(const json& j, const std::string& field) {
  try {
    return Rect{j.at("x_min").get<double>(), j.at("y_min").get<double>(),
                j.at("x_max").get<double>(), j.at("y_max").get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, field + ": " + e.what());
  }
}

}  // namespace

void validate_scene(const Scene& scene) {
  if (scene.id.empty()) invalid("id: must be non-empty");
  if (!(scene.bounds.width() > 0.0) || !(scene.bounds.height() > 0.0))
    invalid("bounds: width and height must be positive");
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    const auto& r = scene.obstacles[i];
    if (!(r.x_max > r.x_min) || !(r.y_max > r.y_min))
      invalid("obstacles[" + std::to_string(i) + "]: degenerate rectangle");
    if (!scene.bounds.contains(r))
      invalid("obstacles[" + std::to_string(i) + "]: obstacle outside bounds");
  }
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& o = scene.objects[i];
    const std::string field = "objects[" + std::to_string(i) + "]";
    if (o.class_name.empty()) invalid(field + ".class: empty class name");
    if (o.class_name != normalize_class_name(o.class_name))
      invalid(field + ".class: not normalized");
    if (!scene.bounds.contains(o.position))
      invalid(field + ": object outside bounds at " + describe(o.position));
    for (const auto& r : scene.obstacles) {
      if (r.contains_strictly(o.position))
        invalid(field + ": object inside obstacle at " + describe(o.position));
    }
  }
}

json scene_to_json(const Scene& scene) {
  json obstacles = json::array();
  for (const auto& r : scene.obstacles) obstacles.push_back(rect_to_json(r));
  json objects = json::array();
  for (const auto& o : scene.objects)
    objects.push_back(json{{"class", o.class_name}, {"x", o.position.x}, {"y", o.position.y}});
  return json{{"id", scene.id},
              {"room_type", std::string(to_string(scene.room_type))},
              {"format_version", scene.format_version},
              {"bounds", rect_to_json(scene.bounds)},
              {"obstacles", std::move(obstacles)},
              {"objects", std::move(objects)}};
}

Scene scene_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "scene document must be an object");
  Scene scene;
  try {
    scene.id = doc.at("id").get<std::string>();
    scene.room_type = parse_room_type(doc.at("room_type").get<std::string>());
    scene.format_version = doc.value("format_version", Scene::kFormatVersion);
    scene.bounds = rect_from_json(doc.at("bounds"), "bounds");
    if (doc.contains("obstacles")) {
      const auto& obs = doc.at("obstacles");
      for (std::size_t i = 0; i < obs.size(); ++i)
        scene.obstacles.push_back(rect_from_json(obs[i], "obstacles[" + std::to_string(i) + "]"));
    }
    if (doc.contains("objects")) {
      for (const auto& o : doc.at("objects")) {
        scene.objects.push_back(ObjectInstance{
            normalize_class_name(o.at("class").get<std::string>()),
            Point{o.at("x").get<double>(), o.at("y").get<double>()}});
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("scene: ") + e.what());
  }
  if (scene.format_version != Scene::kFormatVersion)
    invalid("format_version: unsupported version " + std::to_string(scene.format_version));
  validate_scene(scene);
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scene file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return scene_from_json(doc);
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write scene file " + path.string());
  out << scene_to_json(scene).dump(2) << '\n';
}

std::vector<Scene> load_scene_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::Io, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Scene> scenes;
  scenes.reserve(files.size());
  for (const auto& f : files) scenes.push_back(load_scene(f));
  return scenes;
}

std::vector<Point> achievable_grid_points(const Scene& scene, double grid_side) {
  if (!(grid_side > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid side must be positive");
  const auto& b = scene.bounds;
  const auto nx = static_cast<long>(std::floor(b.width() / grid_side + kGeomEps));
  const auto ny = static_cast<long>(std::floor(b.height() / grid_side + kGeomEps));
  std::vector<Point> points;
  for (long j = 0; j <= ny; ++j) {
    for (long i = 0; i <= nx; ++i) {
      const Point p{b.x_min + static_cast<double>(i) * grid_side,
                    b.y_min + static_cast<double>(j) * grid_side};
      if (scene.is_achievable(p)) points.push_back(p);
    }
  }
  return points;
}

ObjectList ground_truth_object_list(const Scene& scene) {
  std::vector<std::string> names;
  names.reserve(scene.objects.size());
  for (const auto& o : scene.objects) names.push_back(o.class_name);
  return ObjectList::from_names(names);
}

// ---------------------------------------------------------------------------

Catalog catalog_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "catalog must be an object");
  Catalog catalog;
  for (const auto& [key, value] : doc.items()) {
    const RoomType type = parse_room_type(key);
    std::vector<std::string> names;
    for (const auto& n : value) names.push_back(n.get<std::string>());
    catalog[type] = ObjectList::from_names(names).names();
  }
  return catalog;
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open catalog " + path.string());
  try {
    return catalog_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("GROUNDPLAN_DATA_DIR"); env && *env) return env;
#ifdef GROUNDPLAN_BUILD_DATA_DIR
  if (std::filesystem::exists(GROUNDPLAN_BUILD_DATA_DIR)) return GROUNDPLAN_BUILD_DATA_DIR;
#endif
#ifdef GROUNDPLAN_INSTALL_DATA_DIR
  return GROUNDPLAN_INSTALL_DATA_DIR;
#else
  return "data";
#endif
}

}  // namespace groundplan
