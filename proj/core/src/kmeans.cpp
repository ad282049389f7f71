#include <algorithm>
#include <cmath>
#include <limits>

#include "groundplan/errors.hpp"
#include "groundplan/exploration.hpp"
#include "groundplan/random.hpp"

namespace groundplan {

namespace {

int nearest_centroid(Point p, const std::vector<Point>& centroids) {
  int best = 0;
  double best_d = squared_distance(p, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

std::vector<Point> kmeanspp_seeds(std::span<const Point> points, int k, Rng& rng) {
  std::vector<Point> centroids;
  centroids.reserve(static_cast<std::size_t>(k));
  centroids.push_back(points[rng.below(points.size())]);
  std::vector<double> d2(points.size());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = squared_distance(points[i], centroids[static_cast<std::size_t>(nearest_centroid(points[i], centroids))]);
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      pick = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (d2[i] <= 0.0) continue;
        r -= d2[i];
        if (r < 0.0) {
          pick = i;
          break;
        }
      }
      while (d2[pick] <= 0.0 && pick > 0) --pick;
    } else {
      // Fewer distinct points than k: duplicate centroids, Lloyd keeps them apart
      // through empty-cluster re-seeding.
      pick = rng.below(points.size());
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

// Single-point transfers that strictly lower WCSS, with exact centroid
// updates. Escapes Lloyd fixed points where a boundary point sits closer to a
// centroid that would move away once the point joined it.
void hartigan_refine(std::span<const Point> points, std::vector<Point>& centroids, std::vector<int>& assign) {
  const auto k = centroids.size();
  std::vector<double> counts(k, 0.0);
  for (int a : assign) counts[static_cast<std::size_t>(a)] += 1.0;
  // Duplicate centroids can leave a cluster empty; transfers assume none are.
  if (std::find(counts.begin(), counts.end(), 0.0) != counts.end()) return;
  auto recentre_all = [&] {
    std::vector<Point> sums(k);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[static_cast<std::size_t>(assign[i])].x += points[i].x;
      sums[static_cast<std::size_t>(assign[i])].y += points[i].y;
    }
    for (std::size_t c = 0; c < k; ++c) centroids[c] = {sums[c].x / counts[c], sums[c].y / counts[c]};
  };
  recentre_all();

  constexpr double kMinGain = 1e-12;
  for (std::size_t pass = 0; pass < 100 * points.size(); ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto from = static_cast<std::size_t>(assign[i]);
      if (counts[from] <= 1.0) continue;
      const double removal = counts[from] / (counts[from] - 1.0) * squared_distance(points[i], centroids[from]);
      std::size_t best = from;
      double best_gain = kMinGain;
      for (std::size_t to = 0; to < k; ++to) {
        if (to == from) continue;
        const double added = counts[to] / (counts[to] + 1.0) * squared_distance(points[i], centroids[to]);
        if (removal - added > best_gain) {
          best_gain = removal - added;
          best = to;
        }
      }
      if (best == from) continue;
      const Point p = points[i];
      auto& cf = centroids[from];
      auto& cb = centroids[best];
      cf = {(cf.x * counts[from] - p.x) / (counts[from] - 1.0), (cf.y * counts[from] - p.y) / (counts[from] - 1.0)};
      cb = {(cb.x * counts[best] + p.x) / (counts[best] + 1.0), (cb.y * counts[best] + p.y) / (counts[best] + 1.0)};
      assign[i] = static_cast<int>(best);
      counts[from] -= 1.0;
      counts[best] += 1.0;
      moved = true;
    }
    if (!moved) break;
  }
  recentre_all();
}

Clustering lloyd(std::span<const Point> points, std::vector<Point> centroids,
                 const KMeansOptions& options) {
  const auto k = centroids.size();
  std::vector<int> assign(points.size(), 0);
  std::vector<Point> sums(k);
  std::vector<std::size_t> counts(k);

  auto assign_all = [&] {
    for (std::size_t i = 0; i < points.size(); ++i) assign[i] = nearest_centroid(points[i], centroids);
  };
  auto recompute = [&] {
    std::fill(sums.begin(), sums.end(), Point{});
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto c = static_cast<std::size_t>(assign[i]);
      sums[c].x += points[i].x;
      sums[c].y += points[i].y;
      ++counts[c];
    }
    std::vector<Point> next(k);
    std::vector<bool> taken(points.size(), false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        next[c] = {sums[c].x / static_cast<double>(counts[c]), sums[c].y / static_cast<double>(counts[c])};
        continue;
      }
      // Empty cluster: steal the point farthest from its current centroid.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (taken[i]) continue;
        const double d = squared_distance(points[i], centroids[static_cast<std::size_t>(assign[i])]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      taken[far] = true;
      next[c] = points[far];
    }
    return next;
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    assign_all();
    auto next = recompute();
    double moved = 0.0;
    for (std::size_t c = 0; c < k; ++c) moved = std::max(moved, distance(next[c], centroids[c]));
    centroids = std::move(next);
    if (moved < options.tolerance) break;
  }
  assign_all();
  hartigan_refine(points, centroids, assign);

  Clustering out;
  out.k = static_cast<int>(k);
  out.centroids = std::move(centroids);
  out.assignments = assign;
  out.wcss = compute_wcss(points, out.centroids, out.assignments);
  return out;
}

}  // namespace

double compute_wcss(std::span<const Point> points, std::span<const Point> centroids,
                    std::span<const int> assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    total += squared_distance(points[i], centroids[static_cast<std::size_t>(assignments[i])]);
  return total;
}

Clustering kmeans_wcss(std::span<const Point> points, int k, std::uint64_t seed,
                       const KMeansOptions& options) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "kmeans: no points");
  if (k < 1 || static_cast<std::size_t>(k) > points.size())
    throw Error(ErrorCode::InvalidArgument, "kmeans: k=" + std::to_string(k) + " out of range [1, " +
                                                std::to_string(points.size()) + "]");
  Clustering best;
  best.wcss = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    auto run = lloyd(points, kmeanspp_seeds(points, k, rng), options);
    if (run.wcss < best.wcss) best = std::move(run);
  }
  return best;
}

int select_k_elbow(std::span<const std::pair<int, double>> curve, double threshold) {
  if (curve.empty()) throw Error(ErrorCode::InvalidArgument, "elbow: empty WCSS curve");
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto [k, w] = curve[i];
    if (w < 0.0) throw Error(ErrorCode::InvalidArgument, "elbow: negative WCSS");
    if (k != curve.front().first + static_cast<int>(i))
      throw Error(ErrorCode::InvalidArgument, "elbow: curve must list contiguous k values");
    if (w == 0.0) return k;
    if (i + 1 == curve.size()) return k;
    const double drop = (w - curve[i + 1].second) / w;
    if (drop < threshold) return k;
  }
  return curve.back().first;
}

}  // namespace groundplan
