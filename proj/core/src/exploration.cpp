#include "groundplan/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "groundplan/errors.hpp"
#include "groundplan/random.hpp"

namespace groundplan {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); }

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

double CollectionStrategy::grid_side() const {
  return std::visit([](const auto& c) { return c.grid_side; }, criterion);
}

int CollectionStrategy::views_per_location() const {
  return static_cast<int>(std::lround(kTwoPi / unit_angle));
}

std::string CollectionStrategy::criterion_name() const {
  return std::visit(overloaded{[](const Traversal&) { return "traversal"; },
                               [](const RandomSample&) { return "random"; },
                               [](const OverallCenter&) { return "center"; },
                               [](const BlockwiseCenter&) { return "blockwise"; }},
                    criterion);
}

void CollectionStrategy::validate() const {
  if (!(grid_side() > 0.0)) bad("grid side must be positive");
  if (!(unit_angle > 0.0) || unit_angle > kTwoPi + kGeomEps) bad("unit angle must be in (0, 2pi]");
  const double views = kTwoPi / unit_angle;
  if (std::abs(views - std::round(views)) > 1e-6)
    bad("unit angle must divide 2pi into an integer number of views");
  if (const auto* r = std::get_if<RandomSample>(&criterion)) {
    if (!(r->ratio > 0.0) || r->ratio > 1.0) bad("random ratio must be in (0, 1]");
  }
  if (const auto* b = std::get_if<BlockwiseCenter>(&criterion)) {
    if (b->max_clusters < 1) bad("max_clusters must be at least 1");
    if (!(b->elbow_threshold > 0.0) || !(b->elbow_threshold < 1.0))
      bad("elbow threshold must be in (0, 1)");
  }
}

CollectionStrategy CollectionStrategy::from_degrees(LocationCriterion criterion,
                                                    double unit_angle_deg) {
  return CollectionStrategy{std::move(criterion), unit_angle_deg * kDegToRad};
}

json strategy_to_json(const CollectionStrategy& s) {
  json j{{"criterion", s.criterion_name()},
         {"grid", s.grid_side()},
         {"unit_angle_deg", std::round(s.unit_angle / kDegToRad * 1e9) / 1e9}};
  if (const auto* r = std::get_if<RandomSample>(&s.criterion)) j["ratio"] = r->ratio;
  if (const auto* b = std::get_if<BlockwiseCenter>(&s.criterion)) {
    j["max_clusters"] = b->max_clusters;
    j["elbow_threshold"] = b->elbow_threshold;
  }
  return j;
}

CollectionStrategy strategy_from_json(const json& doc) {
  try {
    const auto name = doc.value("criterion", std::string("blockwise"));
    const double grid = doc.value("grid", 0.75);
    const double deg = doc.value("unit_angle_deg", 120.0);
    LocationCriterion criterion;
    if (name == "traversal") {
      criterion = Traversal{grid};
    } else if (name == "random") {
      criterion = RandomSample{grid, doc.value("ratio", 0.01)};
    } else if (name == "center") {
      criterion = OverallCenter{grid};
    } else if (name == "blockwise") {
      criterion = BlockwiseCenter{grid, doc.value("max_clusters", 8), doc.value("elbow_threshold", 0.15)};
    } else {
      bad("unknown criterion '" + name + "'");
    }
    auto strategy = CollectionStrategy::from_degrees(std::move(criterion), deg);
    strategy.validate();
    return strategy;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("strategy: ") + e.what());
  }
}

json pose_to_json(const CameraPose& pose) {
  return json{{"x", pose.x}, {"y", pose.y}, {"theta", pose.theta}};
}

Point nearest_point(std::span<const Point> candidates, Point target) {
  if (candidates.empty()) bad("nearest_point: no candidates");
  const Point* best = &candidates.front();
  double best_d = squared_distance(*best, target);
  for (const auto& p : candidates.subspan(1)) {
    const double d = squared_distance(p, target);
    if (d < best_d - 1e-12 ||
        (std::abs(d - best_d) <= 1e-12 && (p.x < best->x || (p.x == best->x && p.y < best->y)))) {
      best = &p;
      best_d = d;
    }
  }
  return *best;
}

namespace {

std::vector<Point> random_locations(const std::vector<Point>& grid, double ratio, std::uint64_t seed) {
  const std::size_t n = grid.size();
  auto want = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  want = std::clamp<std::size_t>(want, 1, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first `want` slots are a uniform sample.
  for (std::size_t i = 0; i < want; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(want);
  std::sort(idx.begin(), idx.end());
  std::vector<Point> out;
  out.reserve(want);
  for (auto i : idx) out.push_back(grid[i]);
  return out;
}

Point overall_center(const std::vector<Point>& grid) {
  Point c;
  for (const auto& p : grid) {
    c.x += p.x;
    c.y += p.y;
  }
  c.x /= static_cast<double>(grid.size());
  c.y /= static_cast<double>(grid.size());
  return nearest_point(grid, c);
}

std::vector<Point> blockwise_centers(const std::vector<Point>& grid, const BlockwiseCenter& cfg,
                                     std::uint64_t seed) {
  const int k_max = std::min<int>(cfg.max_clusters, static_cast<int>(grid.size()));
  std::vector<Clustering> runs;
  std::vector<std::pair<int, double>> curve;
  for (int k = 1; k <= k_max; ++k) {
    runs.push_back(kmeans_wcss(grid, k, derive_seed(seed, static_cast<std::uint64_t>(k))));
    curve.emplace_back(k, runs.back().wcss);
  }
  const int chosen = select_k_elbow(curve, cfg.elbow_threshold);
  std::vector<Point> out;
  for (const auto& c : runs[static_cast<std::size_t>(chosen - 1)].centroids) {
    const Point snapped = nearest_point(grid, c);
    if (std::find(out.begin(), out.end(), snapped) == out.end()) out.push_back(snapped);
  }
  return out;
}

}  // namespace

std::vector<Point> select_locations(const Scene& scene, const CollectionStrategy& strategy,
                                    std::uint64_t seed) {
  strategy.validate();
  auto grid = achievable_grid_points(scene, strategy.grid_side());
  if (grid.empty())
    bad("scene '" + scene.id + "' has no achievable grid points at grid side " +
        std::to_string(strategy.grid_side()));
  return std::visit(
      overloaded{
          [&](const Traversal&) { return grid; },
          [&](const RandomSample& r) { return random_locations(grid, r.ratio, seed); },
          [&](const OverallCenter&) { return std::vector<Point>{overall_center(grid)}; },
          [&](const BlockwiseCenter& b) { return blockwise_centers(grid, b, seed); },
      },
      strategy.criterion);
}

std::vector<CameraPose> plan_poses(const Scene& scene, const CollectionStrategy& strategy,
                                   std::uint64_t seed) {
  const auto locations = select_locations(scene, strategy, seed);
  const int views = strategy.views_per_location();
  const double step = kTwoPi / static_cast<double>(views);
  std::vector<CameraPose> poses;
  poses.reserve(locations.size() * static_cast<std::size_t>(views));
  for (const auto& p : locations) {
    for (int k = 0; k < views; ++k) poses.push_back(CameraPose{p.x, p.y, step * k});
  }
  return poses;
}

std::size_t image_count(const Scene& scene, const CollectionStrategy& strategy, std::uint64_t seed) {
  return plan_poses(scene, strategy, seed).size();
}

}  // namespace groundplan
