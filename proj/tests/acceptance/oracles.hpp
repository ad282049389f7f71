#pragma once

// Independent reference computations for the acceptance checks. Nothing here
// calls into the library's algorithms; only plain data types are shared.

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "groundplan/geometry.hpp"
#include "groundplan/scene.hpp"

namespace oracle {

/// Minimum WCSS over every assignment of points to exactly k non-empty
/// clusters, each centroid being its cluster mean.
double brute_force_wcss(const std::vector<groundplan::Point>& points, int k);

/// Lattice points of side g anchored at the bounds' min corner, boundary
/// included, dropping points strictly inside an obstacle.
std::vector<groundplan::Point> lattice(const groundplan::Scene& scene, double g);

/// Class names present in the scene.
std::set<std::string> class_set(const groundplan::Scene& scene);

/// Integer successes whose 2-decimal rate over total matches the printed one.
std::size_t successes_for(double printed_rate, std::size_t total);

/// Printed-style rounding: half away from zero, 2 decimals.
double round2(double v);

/// True when some pose sees the object position within range and half the
/// field of view, ignoring occlusion.
bool covered(const groundplan::Point& object, const std::vector<groundplan::Point>& positions,
             const std::vector<double>& headings, double range, double fov);

struct TableRow {
  std::string label;
  double rates[4];
  double average;
};

/// Room item counts of the 60 evaluation items (kitchen, living, bed, bath).
inline constexpr std::size_t kRoomTotals[4] = {14, 19, 15, 12};

const std::vector<TableRow>& table1_rows();
const std::vector<TableRow>& table2_rows();

}  // namespace oracle
