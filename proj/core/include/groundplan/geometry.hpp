#pragma once

#include <cmath>
#include <numbers>

namespace groundplan {

/// Tolerance for lattice and boundary comparisons, in meters.
inline constexpr double kGeomEps = 1e-9;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(Point a, Point b) { return std::sqrt(squared_distance(a, b)); }

/// Axis-aligned rectangle, meters.
struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  Point center() const { return {(x_min + x_max) / 2, (y_min + y_max) / 2}; }

  /// Closed containment (boundary counts as inside).
  bool contains(Point p) const {
    return p.x >= x_min - kGeomEps && p.x <= x_max + kGeomEps &&
           p.y >= y_min - kGeomEps && p.y <= y_max + kGeomEps;
  }
  /// Open containment: the boundary is not inside.
  bool contains_strictly(Point p) const {
    return p.x > x_min + kGeomEps && p.x < x_max - kGeomEps &&
           p.y > y_min + kGeomEps && p.y < y_max - kGeomEps;
  }
  bool contains(const Rect& r) const {
    return contains(Point{r.x_min, r.y_min}) && contains(Point{r.x_max, r.y_max});
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// True when the segment a-b passes through the open interior of r.
/// Grazing an edge or a corner does not count.
bool segment_crosses_interior(Point a, Point b, const Rect& r);

/// Wraps an angle to [-pi, pi).
double wrap_angle(double radians);
/// Wraps an angle to [0, 2pi).
double wrap_angle_positive(double radians);

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace groundplan
