#include "rpl/envs/hook_world.hpp"

#include <algorithm>
#include <cmath>

#include "rpl/common/error.hpp"
#include "rpl/common/random.hpp"

namespace rpl::envs {

namespace {
constexpr double kFallenZ = -0.5;
}

HookConfig HookConfig::scaled() const {
  HookConfig c = *this;
  const double s = scale;
  c.success_radius *= s;
  c.gain *= s;
  c.dt *= s;
  c.table = Rect{table.x_min * s, table.y_min * s, table.x_max * s, table.y_max * s};
  c.reach_y *= s;
  c.object_half_extent *= s;
  c.object_height *= s;
  c.gripper_radius *= s;
  c.gripper_z_max *= s;
  c.gripper_start *= s;
  c.hook_start *= s;
  c.hook_jitter *= s;
  c.shaft_length *= s;
  c.head_length *= s;
  c.hook_radius *= s;
  c.handle_width *= s;
  c.object_x_min *= s;
  c.object_x_max *= s;
  c.object_y_min *= s;
  c.object_y_max *= s;
  c.goal_dx_min *= s;
  c.goal_dx_max *= s;
  c.goal_y_min *= s;
  c.goal_min_separation *= s;
  c.finger_rate *= s;
  c.finger_max *= s;
  c.grasp_tolerance *= s;
  c.release_margin *= s;
  c.extent_min *= s;
  c.extent_max *= s;
  c.bump_half_min *= s;
  c.bump_half_max *= s;
  c.bump_height_min *= s;
  c.bump_height_max *= s;
  c.scale = 1.0;
  return c;
}

HookConfig hook_task_config() { return HookConfig{}; }

HookConfig noisy_hook_task_config() {
  HookConfig c;
  c.task = "noisy_hook";
  return c;
}

HookConfig complex_hook_task_config() {
  HookConfig c;
  c.task = "complex_hook";
  c.randomize_object = true;
  c.bump_count_probs = {0.25, 0.25, 0.25, 0.25};
  return c;
}

HookWorld::HookWorld(HookConfig config) : unit_(std::move(config)), world_(unit_.scaled()) {
  if (world_.horizon < 1) throw ContractError("HookWorld: horizon must be >= 1");
  require(unit_.scale > 0.0, "HookWorld: scale must be positive");
  require(world_.mu > 0.0, "HookWorld: friction coefficient must be positive");
  double total = 0.0;
  for (double p : world_.bump_count_probs) {
    require(p >= 0.0, "HookWorld: bump count probabilities must be non-negative");
    total += p;
  }
  require(world_.bump_count_probs.empty() || std::abs(total - 1.0) < 1e-9,
          "HookWorld: bump count probabilities must sum to 1");
  spec_.state_dim = layout::kHookStateDim;
  spec_.action_dim = 4;
  spec_.goal_dim = 3;
  spec_.horizon = world_.horizon;
  spec_.gamma = world_.gamma;
  spec_.sparse_reward = true;
  reset(0);
}

HookGeometry HookWorld::geometry() const {
  HookGeometry g;
  g.scale = unit_.scale;
  g.shaft_length = world_.shaft_length;
  g.head_length = world_.head_length;
  g.hook_radius = world_.hook_radius;
  g.handle_width = world_.handle_width;
  g.object_radius = world_.object_half_extent;
  g.object_height = world_.object_height;
  g.hook_rest_z = world_.hook_radius;
  g.grasp_tolerance = world_.grasp_tolerance;
  g.gain = world_.gain;
  g.reach_y = world_.reach_y;
  return g;
}

std::pair<Vec2, Vec2> HookWorld::shaft(const Vec2& base) const {
  return {base, base + Vec2(0.0, world_.shaft_length)};
}

std::pair<Vec2, Vec2> HookWorld::head(const Vec2& base) const {
  const Vec2 corner = base + Vec2(0.0, world_.shaft_length);
  return {corner, corner - Vec2(world_.head_length, 0.0)};
}

Observation HookWorld::reset(std::uint64_t seed) {
  Rng rng(seed);
  const HookConfig& c = world_;
  step_ = 0;
  object_radius_ = c.object_half_extent;
  object_mu_ = c.mu;
  object_mass_ = c.object_mass;
  if (c.randomize_object) {
    object_mass_ = rng.uniform(c.mass_min, c.mass_max);
    object_mu_ = rng.uniform(c.mu_min, c.mu_max);
    object_radius_ = rng.uniform(c.extent_min, c.extent_max);
  }
  const double ox = rng.uniform(c.object_x_min, c.object_x_max);
  const double oy = rng.uniform(c.object_y_min, c.object_y_max);
  object_ = Vec3(ox, oy, c.object_rest_z());
  object_vel_.setZero();
  yaw_ = rng.uniform(-M_PI, M_PI);
  const double gx = std::clamp(ox + rng.uniform(c.goal_dx_min, c.goal_dx_max), c.table.x_min, c.table.x_max);
  const double gy = rng.uniform(c.goal_y_min, std::max(c.goal_y_min, oy - c.goal_min_separation));
  goal_ = Vec3(gx, gy, c.object_rest_z());
  const Vec2 jitter(rng.uniform(-c.hook_jitter, c.hook_jitter), rng.uniform(-c.hook_jitter, c.hook_jitter));
  hook_ = Vec3(c.hook_start.x() + jitter.x(), c.hook_start.y() + jitter.y(), c.hook_radius);
  hook_vel_.setZero();
  gripper_ = c.gripper_start;
  gripper_vel_.setZero();
  grasped_ = false;
  fallen_ = false;
  finger_ = c.finger_max;
  finger_vel_ = 0.0;

  bumps_.clear();
  if (!c.bump_count_probs.empty()) {
    double u = rng.uniform();
    int count = 0;
    for (std::size_t k = 0; k < c.bump_count_probs.size(); ++k) {
      if (u < c.bump_count_probs[k] || k + 1 == c.bump_count_probs.size()) {
        count = static_cast<int>(k);
        break;
      }
      u -= c.bump_count_probs[k];
    }
    // Bumps never cover the object, the goal, the hook or the gripper at reset.
    const double clearance = object_radius_ + c.hook_radius;
    for (int b = 0; b < count; ++b) {
      for (int attempt = 0; attempt < 1000; ++attempt) {
        const double hx = rng.uniform(c.bump_half_min, c.bump_half_max);
        const double hy = rng.uniform(c.bump_half_min, c.bump_half_max);
        const double cx = rng.uniform(c.table.x_min + hx, c.table.x_max - hx);
        const double cy = rng.uniform(c.table.y_min + hy, c.table.y_max - hy);
        Bump bump{cx - hx, cy - hy, cx + hx, cy + hy, rng.uniform(c.bump_height_min, c.bump_height_max)};
        const auto [s0, s1] = shaft(hook_.head<2>());
        const auto [h0, h1] = head(hook_.head<2>());
        bool clash = bump.contains(object_.head<2>(), clearance) || bump.contains(goal_.head<2>(), clearance) ||
                     bump.contains(gripper_.head<2>(), clearance);
        for (double t = 0.0; t <= 1.0 && !clash; t += 0.1) {
          clash = bump.contains(s0 + t * (s1 - s0), clearance) || bump.contains(h0 + t * (h1 - h0), clearance);
        }
        if (!clash) {
          bumps_.push_back(bump);
          break;
        }
      }
    }
  }
  return observe();
}

StepResult HookWorld::step(const Vec& action) {
  require(step_ < world_.horizon, "step: episode already reached its horizon");
  require(action.size() == spec_.action_dim, "step: action has wrong dimension");
  require(action.allFinite(), "step: action must be finite");
  ++step_calls_;
  const Vec a = clip_action(action);
  const Vec3 delta = world_.gain * a.head<3>();
  const Vec3 grip_vel = delta / world_.dt;
  const double h = world_.dt / world_.substeps;
  const Vec3 prev = gripper_;
  const Vec3 prev_hook = hook_;
  for (int i = 0; i < world_.substeps; ++i) substep(delta / world_.substeps, grip_vel, h);
  gripper_vel_ = (gripper_ - prev) / world_.dt;
  update_fingers(a(3));
  hook_vel_ = (hook_ - prev_hook) / world_.dt;
  ++step_;
  StepResult result;
  result.observation = observe();
  result.reward = compute_reward(result.observation.achieved_goal, goal_);
  result.step_index = step_;
  return result;
}

bool HookWorld::hook_blocked(const Vec3& base) const {
  if (bumps_.empty()) return false;
  const auto [s0, s1] = shaft(base.head<2>());
  const auto [h0, h1] = head(base.head<2>());
  const double r = world_.hook_radius;
  for (const Bump& b : bumps_) {
    if (base.z() >= b.height) continue;
    for (int i = 0; i <= 20; ++i) {
      const double t = i / 20.0;
      if (b.contains(s0 + t * (s1 - s0), r) || b.contains(h0 + t * (h1 - h0), r)) return true;
    }
  }
  return false;
}

void HookWorld::substep(const Vec3& delta, const Vec3& grip_vel, double h) {
  const HookConfig& c = world_;
  Vec3 next = gripper_ + delta;
  next.x() = std::clamp(next.x(), c.table.x_min, c.table.x_max);
  next.y() = std::clamp(next.y(), c.table.y_min, c.reach_y);
  next.z() = std::clamp(next.z(), 0.0, c.gripper_z_max);
  if (grasped_ && hook_blocked(next)) {
    next.head<2>() = gripper_.head<2>();
    if (hook_blocked(next)) next = gripper_;
  }
  const Vec3 moved = (next - gripper_) / h;
  gripper_ = next;
  if (grasped_) hook_ = gripper_;
  if (fallen_) return;

  const Vec2 o = object_.head<2>();
  Vec2 n;
  double pen = 0.0;
  if (gripper_.z() < c.object_height &&
      disc_contact(gripper_.head<2>(), c.gripper_radius, o, object_radius_, &n, &pen)) {
    push_object(n, pen, moved.head<2>());
  }
  if (grasped_ && hook_.z() < c.object_height) {
    const std::pair<Vec2, Vec2> segments[2] = {shaft(hook_.head<2>()), head(hook_.head<2>())};
    for (const auto& [a, b] : segments) {
      if (fallen_) break;
      Vec2 closest;
      const Vec2 p = object_.head<2>();
      const double dist = point_segment_distance(p, a, b, &closest);
      const double reach = c.hook_radius + object_radius_;
      if (dist < reach) {
        const Vec2 normal = dist > 1e-12 ? Vec2((p - closest) / dist) : Vec2(0.0, -1.0);
        push_object(normal, reach - dist, moved.head<2>());
      }
    }
  }
  (void)grip_vel;
  slide_object(h);
}

void HookWorld::push_object(const Vec2& normal, double penetration, const Vec2& pusher_vel) {
  move_object(normal * penetration);
  if (fallen_) return;
  const double transfer = std::clamp(1.0 / std::sqrt(object_mass_), 0.5, 1.5);
  const double vn = object_vel_.dot(normal);
  const double gn = transfer * pusher_vel.dot(normal);
  if (gn > vn) object_vel_ += (gn - vn) * normal;
}

void HookWorld::move_object(const Vec2& d) {
  if (fallen_ || d.squaredNorm() == 0.0) return;
  const Vec2 o = object_.head<2>();
  const double t = sweep_fraction(o, d, bumps_, object_radius_);
  Vec2 next = o + t * d;
  if (t < 1.0) {
    object_vel_.setZero();
    for (const Bump& b : bumps_)
      if (b.contains(next, object_radius_)) next = o;
  }
  object_.head<2>() = next;
  if (!world_.table.contains(next)) {
    fallen_ = true;
    object_.z() = kFallenZ;
    object_vel_.setZero();
  }
}

void HookWorld::slide_object(double h) {
  const double speed = object_vel_.norm();
  if (speed == 0.0 || fallen_) return;
  const double decel = object_mu_ * world_.gravity;
  const Vec2 dir = object_vel_ / speed;
  Vec2 d;
  if (decel * h >= speed) {
    d = dir * (speed * speed / (2.0 * decel));
    object_vel_.setZero();
  } else {
    d = (object_vel_ - 0.5 * decel * h * dir) * h;
    object_vel_ -= decel * h * dir;
  }
  move_object(d);
}

void HookWorld::update_fingers(double command) {
  const HookConfig& c = world_;
  const double before = finger_;
  if (grasped_) {
    if (command < 0.0) {
      finger_ += c.finger_rate * (-command);
      if (finger_ > c.handle_width + c.release_margin) grasped_ = false;
    } else {
      finger_ = std::max(c.handle_width, finger_ - c.finger_rate * command);
    }
  } else {
    const Vec3 rel = hook_ - gripper_;
    const bool in_reach = rel.head<2>().norm() < c.grasp_tolerance && std::abs(rel.z()) < c.grasp_tolerance;
    if (command > 0.5 && before >= c.handle_width && in_reach) {
      grasped_ = true;
      finger_ = c.handle_width;
    } else {
      finger_ = std::clamp(finger_ - c.finger_rate * command, 0.0, c.finger_max);
    }
  }
  finger_ = std::min(finger_, c.finger_max);
  finger_vel_ = (finger_ - before) / c.dt;
  if (!grasped_) hook_.z() = c.hook_radius;
}

double HookWorld::compute_reward(const Vec& achieved, const Vec& desired) const {
  return sparse_goal_reward(achieved, desired, world_.success_radius);
}

Vec HookWorld::achieved_goal_of(const Vec& state) const {
  require(state.size() >= layout::kObjectPos + 3, "achieved_goal_of: state too short");
  return state.segment<3>(layout::kObjectPos);
}

std::vector<int> HookWorld::noisy_components() const {
  return {layout::kObjectPos,     layout::kObjectPos + 1, layout::kObjectYaw, layout::kHookPos,
          layout::kHookPos + 1,   layout::kHookPos + 2,   layout::kHookYaw};
}

void HookWorld::refresh_derived(Vec& s) const {
  s.segment<3>(layout::kObjectRel) = s.segment<3>(layout::kObjectPos) - s.segment<3>(layout::kGripperPos);
  s.segment<3>(layout::kHookRel) = s.segment<3>(layout::kHookPos) - s.segment<3>(layout::kGripperPos);
}

Observation HookWorld::observe() const {
  Vec s(layout::kHookStateDim);
  s.segment<3>(layout::kGripperPos) = gripper_;
  s.segment<3>(layout::kGripperVel) = gripper_vel_;
  s.segment<3>(layout::kObjectPos) = object_;
  s(layout::kObjectYaw) = yaw_;
  s.segment<3>(layout::kObjectVel) = Vec3(object_vel_.x(), object_vel_.y(), 0.0);
  s(layout::kFingerWidth) = finger_;
  s(layout::kFingerVel) = finger_vel_;
  s.segment<3>(layout::kHookPos) = hook_;
  s(layout::kHookYaw) = 0.0;
  s.segment<3>(layout::kHookVel) = hook_vel_;
  refresh_derived(s);
  Observation obs;
  obs.achieved_goal = achieved_goal_of(s);
  obs.state = std::move(s);
  obs.desired_goal = goal_;
  obs.step_index = step_;
  return obs;
}

}  // namespace rpl::envs
