#pragma once

#include <vector>

#include <Eigen/Dense>

namespace rpl::envs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

// Axis-aligned rigid box fixed to the table.
struct Bump {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  double height = 0;

  bool contains(const Vec2& p, double inflate) const {
    return p.x() > x_min - inflate && p.x() < x_max + inflate && p.y() > y_min - inflate &&
           p.y() < y_max + inflate;
  }
};

struct Rect {
  double x_min = 0, y_min = 0, x_max = 1, y_max = 1;
  bool contains(const Vec2& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
};

// Fraction t in [0, 1] of the displacement `d` a disc of radius `radius`
// centred at `p` can travel before touching any bump footprint.
double sweep_fraction(const Vec2& p, const Vec2& d, const std::vector<Bump>& bumps, double radius);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, Vec2* closest = nullptr);

// Quasi-static contact: if a pusher (point of radius pusher_radius at `pusher`)
// overlaps a disc at `disc`, returns the unit normal pointing into the disc and
// the displacement needed to separate them.
bool disc_contact(const Vec2& pusher, double pusher_radius, const Vec2& disc, double disc_radius, Vec2* normal,
                  double* penetration);

}  // namespace rpl::envs
