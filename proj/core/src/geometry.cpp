#include "groundplan/geometry.hpp"

#include <algorithm>

namespace groundplan {

bool segment_crosses_interior(Point a, Point b, const Rect& r) {
  // Liang-Barsky clip against the closed rectangle, then test whether the
  // clipped piece has an interior point (its midpoint is enough for a convex
  // region when the piece has positive length).
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - r.x_min, r.x_max - a.x, a.y - r.y_min, r.y_max - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  const double tm = (t0 + t1) / 2;
  const Point mid{a.x + tm * dx, a.y + tm * dy};
  return r.contains_strictly(mid);
}

double wrap_angle(double radians) {
  double w = std::fmod(radians + std::numbers::pi, kTwoPi);
  if (w < 0) w += kTwoPi;
  return w - std::numbers::pi;
}

double wrap_angle_positive(double radians) {
  double w = std::fmod(radians, kTwoPi);
  if (w < 0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

}  // namespace groundplan
