#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundplan/geometry.hpp"
#include "groundplan/scene.hpp"

namespace groundplan {

// Location selection criteria. Every criterion works on the achievable
// lattice of side grid_side.
struct Traversal {
  double grid_side = 0.75;
};

struct RandomSample {
  double grid_side = 0.75;
  /// Fraction of lattice points kept, in (0, 1].
  double ratio = 0.01;
};

struct OverallCenter {
  double grid_side = 0.75;
};

struct BlockwiseCenter {
  double grid_side = 0.75;
  int max_clusters = 8;
  /// Relative WCSS drop below which adding a cluster stops paying off.
  double elbow_threshold = 0.15;
};

using LocationCriterion = std::variant<Traversal, RandomSample, OverallCenter, BlockwiseCenter>;

struct CollectionStrategy {
  LocationCriterion criterion = BlockwiseCenter{};
  /// Camera rotation step; 2*pi / unit_angle must be an integer.
  double unit_angle = kTwoPi / 3.0;

  double grid_side() const;
  /// Views per location, 2*pi / unit_angle.
  int views_per_location() const;
  std::string criterion_name() const;

  /// Throws Error{InvalidArgument} on any out-of-range hyperparameter.
  void validate() const;

  static CollectionStrategy from_degrees(LocationCriterion criterion, double unit_angle_deg);
};

/// {criterion, grid, unit_angle_deg, ratio, max_clusters, elbow_threshold}
nlohmann::json strategy_to_json(const CollectionStrategy& strategy);
CollectionStrategy strategy_from_json(const nlohmann::json& doc);

struct CameraPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Point position() const { return {x, y}; }
  friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

nlohmann::json pose_to_json(const CameraPose& pose);

/// Observation locations chosen by the strategy's criterion, before the
/// rotation expansion.
std::vector<Point> select_locations(const Scene& scene, const CollectionStrategy& strategy,
                                    std::uint64_t seed);

/// Locations expanded into theta = k * unit_angle, k ascending per location.
std::vector<CameraPose> plan_poses(const Scene& scene, const CollectionStrategy& strategy,
                                   std::uint64_t seed);

std::size_t image_count(const Scene& scene, const CollectionStrategy& strategy, std::uint64_t seed);

/// The candidate nearest to target; ties go to smaller x, then smaller y.
Point nearest_point(std::span<const Point> candidates, Point target);

// ---------------------------------------------------------------------------
// K-means

struct Clustering {
  int k = 0;
  std::vector<Point> centroids;
  std::vector<int> assignments;
  double wcss = 0.0;
};

struct KMeansOptions {
  int max_iterations = 100;
  double tolerance = 1e-9;
  /// Independent k-means++ restarts; the lowest-WCSS run is kept.
  int restarts = 50;
};

/// Lloyd iteration from k-means++ seeds, then single-point transfers while
/// they lower WCSS. Empty clusters are re-seeded to the
/// point farthest from its centroid.
Clustering kmeans_wcss(std::span<const Point> points, int k, std::uint64_t seed,
                       const KMeansOptions& options = {});

/// Sum of squared distances of points to their assigned centroids.
double compute_wcss(std::span<const Point> points, std::span<const Point> centroids,
                    std::span<const int> assignments);

/// Smallest k whose relative WCSS drop to k+1 is below threshold; the last k
/// of the curve when none is. A zero WCSS returns that k immediately.
int select_k_elbow(std::span<const std::pair<int, double>> wcss_curve, double threshold);

}  // namespace groundplan
