#include "rpl/controllers/reactive.hpp"

#include <cmath>

#include "rpl/common/error.hpp"
#include "rpl/envs/push_world.hpp"

namespace rpl::controllers {

namespace L = envs::layout;

Vec push_location(const Vec& object_pos, const Vec& goal_pos, double object_radius) {
  require(object_pos.size() == goal_pos.size(), "push_location: dimension mismatch");
  const Vec diff = object_pos - goal_pos;
  const double n = diff.norm();
  if (!(n >= 1e-9)) return object_pos;
  return object_pos + object_radius * diff / n;
}

namespace {

Vec move(const Vec3& displacement, double finger, double gain) {
  Vec a(4);
  a.head<3>() = (gain * displacement).cwiseMax(-1.0).cwiseMin(1.0);
  a(3) = std::clamp(finger, -1.0, 1.0);
  for (int i = 0; i < 4; ++i)
    if (!std::isfinite(a(i))) a(i) = 0.0;
  return a;
}

void set_rule(int* out, int rule) {
  if (out) *out = rule;
}

// Projection parameter and perpendicular distance of p onto segment a->b.
bool between(const Vec3& a, const Vec3& b, const Vec3& p, double radius) {
  const Vec3 seg = b - a;
  const double len2 = seg.squaredNorm();
  if (len2 < 1e-18) return false;
  const double t = (p - a).dot(seg) / len2;
  if (!(t > 0.0 && t < 1.0)) return false;
  return (p - a - t * seg).norm() < radius;
}

void check_state(const Observation& obs, int min_dim, const char* who) {
  require(obs.state.size() >= min_dim && obs.desired_goal.size() == 3, std::string(who) + ": observation too short");
}

}  // namespace

Vec reactive_push(const Observation& obs, const ReactiveParams& p, int* rule) {
  check_state(obs, L::kPushStateDim, "reactive_push");
  const double gain = p.gain_scale * p.miscalibration_multiplier;
  const Vec3 g = obs.state.segment<3>(L::kGripperPos);
  const Vec3 o = obs.state.segment<3>(L::kObjectPos);
  const Vec3 goal = obs.desired_goal;
  if ((o - goal).norm() < p.distance_threshold) {
    set_rule(rule, push_rule::kAtTarget);
    return Vec::Zero(4);
  }
  const Vec2 pl2 = push_location(Vec(o.head<2>()), Vec(goal.head<2>()), p.push_offset);
  const Vec3 pl(pl2.x(), pl2.y(), p.push_height);
  if (between(g, goal, o, p.object_radius)) {
    set_rule(rule, push_rule::kPush);
    // Aim the gripper at the push location the object would have at the goal.
    return move((goal - o) + (pl - g), 0.0, gain);
  }
  const Vec2 offset = pl.head<2>() - g.head<2>();
  if (offset.norm() < p.distance_threshold) {
    set_rule(rule, push_rule::kDescend);
    return move(pl - g, 0.0, gain);
  }
  set_rule(rule, push_rule::kApproach);
  const double clear_z = 2.0 * p.push_height + p.distance_threshold;
  if (g.z() < clear_z) return move(Vec3(0.0, 0.0, p.hover_height - g.z()), 0.0, gain);
  return move(Vec3(offset.x(), offset.y(), p.hover_height - g.z()), 0.0, gain);
}

Vec reactive_pick_and_place(const Observation& obs, const ReactiveParams& p, int* rule) {
  check_state(obs, L::kPushStateDim, "reactive_pick_and_place");
  const double gain = p.gain_scale * p.miscalibration_multiplier;
  const Vec3 g = obs.state.segment<3>(L::kGripperPos);
  const Vec3 o = obs.state.segment<3>(L::kObjectPos);
  const double fingers = obs.state(L::kFingerWidth);
  const Vec3 goal = obs.desired_goal;
  if ((o - goal).norm() < p.distance_threshold) {
    set_rule(rule, pick_rule::kAtTarget);
    return Vec::Zero(4);
  }
  const Vec3 rel = o - g;
  const bool between_fingers = rel.head<2>().norm() < p.grasp_tolerance && std::abs(rel.z()) < p.grasp_tolerance;
  if (between_fingers && fingers <= p.object_width + 1e-9) {
    set_rule(rule, pick_rule::kCarry);
    return move(goal - o, 1.0, gain);
  }
  if (between_fingers) {
    set_rule(rule, pick_rule::kClose);
    return move(Vec3::Zero(), 1.0, gain);
  }
  if (rel.head<2>().norm() < p.distance_threshold) {
    if (fingers < p.object_width) {
      set_rule(rule, pick_rule::kOpen);
      return move(Vec3::Zero(), -1.0, gain);
    }
    set_rule(rule, pick_rule::kDescend);
    return move(rel, 0.0, gain);
  }
  set_rule(rule, pick_rule::kApproach);
  return move(Vec3(rel.x(), rel.y(), o.z() + p.hover_height - g.z()), 0.0, gain);
}

HookParams hook_params_for(const envs::HookWorld& world) {
  HookParams h;
  h.geometry = world.geometry();
  const double s = h.geometry.scale;
  h.base.distance_threshold *= s;
  h.base.gain_scale = 10.0 / s;
  h.base.object_radius = h.geometry.object_radius;
  h.base.grasp_tolerance = 0.5 * h.geometry.grasp_tolerance;
  h.lift_height *= s;
  h.lifted_margin *= s;
  h.sweep_lift *= s;
  h.clearance *= s;
  return h;
}

Vec reactive_hook(const Observation& obs, const HookParams& hp, int* rule) {
  check_state(obs, L::kHookStateDim, "reactive_hook");
  const ReactiveParams& p = hp.base;
  const envs::HookGeometry& G = hp.geometry;
  const double gain = p.gain_scale * p.miscalibration_multiplier;
  const Vec3 g = obs.state.segment<3>(L::kGripperPos);
  const Vec3 o = obs.state.segment<3>(L::kObjectPos);
  const Vec3 hook = obs.state.segment<3>(L::kHookPos);
  const double fingers = obs.state(L::kFingerWidth);
  const Vec3 goal = obs.desired_goal;
  if ((o - goal).norm() < p.distance_threshold) {
    set_rule(rule, hook_rule::kAtTarget);
    return Vec::Zero(4);
  }
  const bool grasped = std::abs(fingers - G.handle_width) < 1e-6 * G.scale;
  const bool lifted = grasped && hook.z() - G.hook_rest_z > hp.lifted_margin;
  if (!lifted) {
    set_rule(rule, hook_rule::kGraspHook);
    if (grasped) return move(Vec3(0.0, 0.0, hp.lift_height - g.z()), 1.0, gain);
    const Vec3 rel = hook - g;
    if (rel.head<2>().norm() > p.grasp_tolerance) {
      // Travel at lift height, then drop onto the handle.
      if (g.z() < hp.lift_height - p.distance_threshold && rel.head<2>().norm() > G.grasp_tolerance)
        return move(Vec3(rel.x(), rel.y(), hp.lift_height - g.z()), -1.0, gain);
      return move(Vec3(rel.x(), rel.y(), 0.0), -1.0, gain);
    }
    if (rel.z() < -p.grasp_tolerance || fingers < G.handle_width) return move(rel, -1.0, gain);
    return move(rel, 1.0, gain);
  }
  const double reach = G.object_radius + G.hook_radius;
  const Vec2 target(o.x() + reach + hp.clearance, o.y() + reach + hp.clearance - G.shaft_length);
  const Vec2 off = hook.head<2>() - target;
  const double slack = 2.0 * hp.clearance;
  const double far = G.head_length - reach - hp.clearance;
  const bool positioned = off.x() >= -slack && off.y() >= -slack && off.x() <= far && off.y() <= far;
  if (!positioned) {
    set_rule(rule, hook_rule::kPosition);
    return move(Vec3(-off.x(), -off.y(), hp.lift_height - g.z()), 1.0, gain);
  }
  set_rule(rule, hook_rule::kSweep);
  const double sweep_z = G.hook_rest_z + hp.sweep_lift;
  if (g.z() > G.object_height) return move(Vec3(0.0, 0.0, sweep_z - g.z()), 1.0, 1.0 / G.gain);
  return move(Vec3(goal.x() - o.x(), goal.y() - o.y(), sweep_z - g.z()), 1.0, gain);
}

}  // namespace rpl::controllers
