#include <algorithm>
#include <cmath>
#include <deque>

#include "groundplan/errors.hpp"
#include "groundplan/random.hpp"
#include "groundplan/scene.hpp"

namespace groundplan {

namespace {

double round_to(double value, double step) { return std::round(value / step) * step; }

double draw_side(Rng& rng, const Range<double>& range, double quantum, double offset) {
  if (quantum <= 0.0) return round_to(rng.uniform(range.lo, range.hi), 0.01);
  const auto n_lo = static_cast<std::int64_t>(std::ceil((range.lo - offset) / quantum - kGeomEps));
  const auto n_hi = static_cast<std::int64_t>(std::floor((range.hi - offset) / quantum + kGeomEps));
  if (n_hi < n_lo || n_hi < 0) return range.hi;
  const auto n = rng.between(std::max<std::int64_t>(n_lo, 0), n_hi);
  return offset + quantum * static_cast<double>(n);
}

}  // namespace

void SceneGenSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!width.valid() || !(width.lo > 0.0)) fail("width range must be non-empty and positive");
  if (!height.valid() || !(height.lo > 0.0)) fail("height range must be non-empty and positive");
  if (!obstacle_count.valid() || obstacle_count.lo < 0) fail("obstacle count range invalid");
  if (!obstacle_side.valid() || !(obstacle_side.lo > 0.0)) fail("obstacle side range invalid");
  if (!object_count.valid() || object_count.lo < 0) fail("object count range invalid");
  if (size_quantum < 0.0) fail("size quantum must be non-negative");
  if (max_attempts < 1) fail("max_attempts must be at least 1");
  for (RoomType t : kAllRoomTypes) {
    auto it = catalog.find(t);
    if (it == catalog.end() || it->second.empty())
      fail("catalog has no classes for " + std::string(to_string(t)));
  }
}

bool achievable_area_connected(const Scene& scene, double resolution) {
  const auto& b = scene.bounds;
  const auto nx = std::max<long>(1, std::lround(std::ceil(b.width() / resolution)));
  const auto ny = std::max<long>(1, std::lround(std::ceil(b.height() / resolution)));
  const double cw = b.width() / static_cast<double>(nx);
  const double ch = b.height() / static_cast<double>(ny);
  std::vector<char> free(static_cast<std::size_t>(nx * ny));
  long free_count = 0;
  long first = -1;
  for (long j = 0; j < ny; ++j) {
    for (long i = 0; i < nx; ++i) {
      const Point c{b.x_min + (static_cast<double>(i) + 0.5) * cw,
                    b.y_min + (static_cast<double>(j) + 0.5) * ch};
      const bool f = scene.is_achievable(c);
      free[static_cast<std::size_t>(j * nx + i)] = f;
      if (f) {
        ++free_count;
        if (first < 0) first = j * nx + i;
      }
    }
  }
  if (free_count == 0) return false;
  std::vector<char> seen(free.size(), 0);
  std::deque<long> queue{first};
  seen[static_cast<std::size_t>(first)] = 1;
  long reached = 0;
  while (!queue.empty()) {
    const long cell = queue.front();
    queue.pop_front();
    ++reached;
    const long i = cell % nx;
    const long j = cell / nx;
    const long nbrs[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& n : nbrs) {
      if (n[0] < 0 || n[0] >= nx || n[1] < 0 || n[1] >= ny) continue;
      const auto idx = static_cast<std::size_t>(n[1] * nx + n[0]);
      if (free[idx] && !seen[idx]) {
        seen[idx] = 1;
        queue.push_back(n[1] * nx + n[0]);
      }
    }
  }
  return reached == free_count;
}

Scene generate_synthetic_scene(const SceneGenSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  Scene scene;
  scene.id = std::string(to_string(spec.room_type)) + "-" + hex64(seed).substr(8);
  scene.room_type = spec.room_type;
  scene.bounds = Rect{0.0, 0.0, draw_side(rng, spec.width, spec.size_quantum, spec.size_offset),
                      draw_side(rng, spec.height, spec.size_quantum, spec.size_offset)};

  const auto& vocab = spec.catalog.at(spec.room_type);
  const int n_obstacles =
      static_cast<int>(rng.between(spec.obstacle_count.lo, spec.obstacle_count.hi));
  const int n_objects = static_cast<int>(rng.between(spec.object_count.lo, spec.object_count.hi));

  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    scene.obstacles.clear();
    for (int k = 0; k < n_obstacles; ++k) {
      const double w = std::min(round_to(rng.uniform(spec.obstacle_side.lo, spec.obstacle_side.hi), 0.05),
                                scene.bounds.width());
      const double h = std::min(round_to(rng.uniform(spec.obstacle_side.lo, spec.obstacle_side.hi), 0.05),
                                scene.bounds.height());
      const double x = round_to(rng.uniform(0.0, scene.bounds.width() - w), 0.05);
      const double y = round_to(rng.uniform(0.0, scene.bounds.height() - h), 0.05);
      scene.obstacles.push_back(Rect{x, y, std::min(x + w, scene.bounds.x_max),
                                     std::min(y + h, scene.bounds.y_max)});
    }
    if (!achievable_area_connected(scene)) continue;

    scene.objects.clear();
    bool placed_all = true;
    for (int k = 0; k < n_objects && placed_all; ++k) {
      const auto& name = vocab[rng.below(vocab.size())];
      placed_all = false;
      for (int tries = 0; tries < 1000; ++tries) {
        const Point p{round_to(rng.uniform(0.0, scene.bounds.width()), 0.01),
                      round_to(rng.uniform(0.0, scene.bounds.height()), 0.01)};
        if (scene.is_achievable(p)) {
          scene.objects.push_back(ObjectInstance{name, p});
          placed_all = true;
          break;
        }
      }
    }
    if (!placed_all) continue;
    validate_scene(scene);
    return scene;
  }
  throw Error(ErrorCode::Generation, "no connected layout found within " +
                                         std::to_string(spec.max_attempts) + " attempts");
}

}  // namespace groundplan
