#include "rpl/envs/planar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rpl::envs {

double sweep_fraction(const Vec2& p, const Vec2& d, const std::vector<Bump>& bumps, double radius) {
  double t_hit = 1.0;
  for (const Bump& b : bumps) {
    if (b.contains(p, radius)) return 0.0;
    // Slab test against the footprint inflated by the disc radius.
    double t0 = 0.0, t1 = 1.0;
    const double lo[2] = {b.x_min - radius, b.y_min - radius};
    const double hi[2] = {b.x_max + radius, b.y_max + radius};
    bool miss = false;
    for (int axis = 0; axis < 2 && !miss; ++axis) {
      if (std::abs(d[axis]) < 1e-15) {
        if (p[axis] <= lo[axis] || p[axis] >= hi[axis]) miss = true;
        continue;
      }
      double a = (lo[axis] - p[axis]) / d[axis];
      double c = (hi[axis] - p[axis]) / d[axis];
      if (a > c) std::swap(a, c);
      t0 = std::max(t0, a);
      t1 = std::min(t1, c);
      if (t0 >= t1) miss = true;
    }
    if (!miss) t_hit = std::min(t_hit, t0);
  }
  return t_hit;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, Vec2* closest) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 q = a + t * ab;
  if (closest) *closest = q;
  return (p - q).norm();
}

bool disc_contact(const Vec2& pusher, double pusher_radius, const Vec2& disc, double disc_radius, Vec2* normal,
                  double* penetration) {
  const Vec2 delta = disc - pusher;
  const double dist = delta.norm();
  const double reach = pusher_radius + disc_radius;
  if (dist >= reach) return false;
  *normal = dist > 1e-12 ? Vec2(delta / dist) : Vec2(1.0, 0.0);
  *penetration = reach - dist;
  return true;
}

}  // namespace rpl::envs
