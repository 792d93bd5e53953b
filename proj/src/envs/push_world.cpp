#include "rpl/envs/push_world.hpp"

#include <algorithm>
#include <cmath>

#include "rpl/common/error.hpp"
#include "rpl/common/random.hpp"

namespace rpl::envs {

namespace {
constexpr double kFallenZ = -0.5;
}

PushConfig push_task_config() { return PushConfig{}; }

PushConfig slippery_push_task_config() {
  PushConfig c;
  c.task = "slippery_push";
  c.mu = 0.18;
  return c;
}

PushConfig pick_and_place_task_config() {
  PushConfig c;
  c.task = "pick_and_place";
  c.fingers_locked = false;
  c.air_goal_prob = 0.5;
  return c;
}

PlanarPushWorld::PlanarPushWorld(PushConfig config) : config_(std::move(config)) {
  if (config_.horizon < 1) throw ContractError("PlanarPushWorld: horizon must be >= 1");
  require(config_.mu > 0.0, "PlanarPushWorld: friction coefficient must be positive");
  require(config_.substeps >= 1 && config_.dt > 0.0 && config_.gain > 0.0, "PlanarPushWorld: bad integrator settings");
  spec_.state_dim = layout::kPushStateDim;
  spec_.action_dim = 4;
  spec_.goal_dim = 3;
  spec_.horizon = config_.horizon;
  spec_.gamma = config_.gamma;
  spec_.sparse_reward = true;
  place(config_.gripper_start, Vec3(0.5, 0.5, config_.object_rest_z()), Vec3(0.5, 0.5, config_.object_rest_z()));
}

void PlanarPushWorld::place(const Vec3& gripper, const Vec3& object, const Vec3& goal) {
  step_ = 0;
  gripper_ = gripper;
  gripper_vel_.setZero();
  object_ = object;
  object_vel_.setZero();
  object_vz_ = 0.0;
  goal_ = goal;
  fallen_ = false;
  grasped_ = false;
  finger_ = config_.fingers_locked ? 0.0 : config_.finger_max;
  finger_vel_ = 0.0;
}

Observation PlanarPushWorld::reset(std::uint64_t seed) {
  Rng rng(seed);
  const Vec2 centre(0.5 * (config_.table.x_min + config_.table.x_max), 0.5 * (config_.table.y_min + config_.table.y_max));
  const double r = config_.spawn_range;
  const Vec2 grip_xy = config_.gripper_start.head<2>();
  Vec2 obj;
  do {
    obj = centre + Vec2(rng.uniform(-r, r), rng.uniform(-r, r));
  } while ((obj - grip_xy).norm() < config_.min_separation);
  Vec2 goal_xy;
  do {
    goal_xy = centre + Vec2(rng.uniform(-r, r), rng.uniform(-r, r));
  } while ((goal_xy - obj).norm() < config_.min_separation);
  double goal_z = config_.object_rest_z();
  if (config_.air_goal_prob > 0.0 && rng.uniform() < config_.air_goal_prob) {
    goal_z += config_.max_goal_height * (1.0 - rng.uniform());  // (0, max]
  }
  place(config_.gripper_start, Vec3(obj.x(), obj.y(), config_.object_rest_z()), Vec3(goal_xy.x(), goal_xy.y(), goal_z));
  yaw_ = rng.uniform(-M_PI, M_PI);
  return observe();
}

StepResult PlanarPushWorld::step(const Vec& action) {
  require(step_ < config_.horizon, "step: episode already reached its horizon");
  require(action.size() == spec_.action_dim, "step: action has wrong dimension");
  require(action.allFinite(), "step: action must be finite");
  ++step_calls_;
  const Vec a = clip_action(action);
  const Vec3 delta = config_.gain * a.head<3>();
  const Vec3 grip_vel = delta / config_.dt;
  const double h = config_.dt / config_.substeps;
  const Vec3 prev = gripper_;
  for (int i = 0; i < config_.substeps; ++i) substep(delta / config_.substeps, grip_vel, h);
  gripper_vel_ = (gripper_ - prev) / config_.dt;
  update_fingers(a(3));
  ++step_;
  StepResult result;
  result.observation = observe();
  result.reward = compute_reward(result.observation.achieved_goal, goal_);
  result.step_index = step_;
  return result;
}

void PlanarPushWorld::substep(const Vec3& delta, const Vec3& grip_vel, double h) {
  gripper_ += delta;
  gripper_.x() = std::clamp(gripper_.x(), config_.table.x_min, config_.table.x_max);
  gripper_.y() = std::clamp(gripper_.y(), config_.table.y_min, config_.table.y_max);
  gripper_.z() = std::clamp(gripper_.z(), 0.0, config_.gripper_z_max);
  if (fallen_) return;
  if (grasped_) {
    object_ = gripper_;
    object_.z() = std::max(object_.z(), config_.object_rest_z());
    object_vel_ = grip_vel.head<2>();
    object_vz_ = grip_vel.z();
    return;
  }
  const bool low = gripper_.z() < config_.object_top();
  const Vec2 g = gripper_.head<2>();
  const Vec2 o = object_.head<2>();
  const bool straddling = !config_.fingers_locked && finger_ >= config_.object_top() &&
                          (g - o).norm() < config_.grasp_tolerance;
  Vec2 n;
  double pen = 0.0;
  if (low && !straddling && disc_contact(g, config_.gripper_radius, o, config_.object_half_extent, &n, &pen)) {
    move_object(n * pen);
    if (!fallen_) {
      const double vn = object_vel_.dot(n);
      const double gn = grip_vel.head<2>().dot(n);
      if (gn > vn) object_vel_ += (gn - vn) * n;
    }
  }
  slide_object(h);
}

void PlanarPushWorld::move_object(const Vec2& d) {
  if (fallen_ || d.squaredNorm() == 0.0) return;
  const Vec2 o = object_.head<2>();
  const double t = sweep_fraction(o, d, bumps_, config_.object_half_extent);
  Vec2 next = o + t * d;
  if (t < 1.0) {
    object_vel_.setZero();
    for (const Bump& b : bumps_)
      if (b.contains(next, config_.object_half_extent)) next = o;
  }
  object_.head<2>() = next;
  if (!config_.table.contains(next)) {
    fallen_ = true;
    object_.z() = kFallenZ;
    object_vel_.setZero();
  }
}

void PlanarPushWorld::slide_object(double h) {
  const double speed = object_vel_.norm();
  if (speed == 0.0 || fallen_) return;
  const double decel = config_.mu * config_.gravity;
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

void PlanarPushWorld::update_fingers(double command) {
  finger_vel_ = 0.0;
  if (config_.fingers_locked) return;
  const double before = finger_;
  const double width = config_.object_top();
  if (grasped_) {
    if (command < 0.0) {
      finger_ += config_.finger_rate * (-command);
      if (finger_ > width + config_.release_margin) grasped_ = false;
    } else {
      finger_ = std::max(width, finger_ - config_.finger_rate * command);
    }
  } else {
    const Vec3 rel = object_ - gripper_;
    const bool in_reach = rel.head<2>().norm() < config_.grasp_tolerance && std::abs(rel.z()) < config_.grasp_tolerance;
    if (command > 0.5 && before >= width && in_reach && !fallen_) {
      grasped_ = true;
      finger_ = width;
    } else {
      finger_ = std::clamp(finger_ - config_.finger_rate * command, 0.0, config_.finger_max);
    }
  }
  finger_ = std::min(finger_, config_.finger_max);
  finger_vel_ = (finger_ - before) / config_.dt;
  if (!grasped_ && !fallen_ && object_.z() > config_.object_rest_z()) {
    object_.z() = config_.object_rest_z();
    object_vz_ = 0.0;
  }
}

double PlanarPushWorld::compute_reward(const Vec& achieved, const Vec& desired) const {
  return sparse_goal_reward(achieved, desired, config_.success_radius);
}

Vec PlanarPushWorld::achieved_goal_of(const Vec& state) const {
  require(state.size() >= layout::kObjectPos + 3, "achieved_goal_of: state too short");
  return state.segment<3>(layout::kObjectPos);
}

Observation PlanarPushWorld::observe() const {
  Vec s(layout::kPushStateDim);
  s.segment<3>(layout::kGripperPos) = gripper_;
  s.segment<3>(layout::kGripperVel) = gripper_vel_;
  s.segment<3>(layout::kObjectPos) = object_;
  s(layout::kObjectYaw) = yaw_;
  s.segment<3>(layout::kObjectVel) = Vec3(object_vel_.x(), object_vel_.y(), object_vz_);
  s.segment<3>(layout::kObjectRel) = object_ - gripper_;
  s(layout::kFingerWidth) = finger_;
  s(layout::kFingerVel) = finger_vel_;
  Observation obs;
  obs.achieved_goal = achieved_goal_of(s);
  obs.state = std::move(s);
  obs.desired_goal = goal_;
  obs.step_index = step_;
  return obs;
}

bool PlanarPushWorld::restore(const Observation& obs) {
  if (obs.state.size() != layout::kPushStateDim || obs.desired_goal.size() != 3) return false;
  if (obs.step_index < 0 || obs.step_index > config_.horizon) return false;
  const Vec& s = obs.state;
  step_ = obs.step_index;
  gripper_ = s.segment<3>(layout::kGripperPos);
  gripper_vel_ = s.segment<3>(layout::kGripperVel);
  object_ = s.segment<3>(layout::kObjectPos);
  yaw_ = s(layout::kObjectYaw);
  object_vel_ = s.segment<2>(layout::kObjectVel);
  object_vz_ = s(layout::kObjectVel + 2);
  finger_ = s(layout::kFingerWidth);
  finger_vel_ = s(layout::kFingerVel);
  goal_ = obs.desired_goal;
  fallen_ = object_.z() < 0.0;
  const Vec3 rel = object_ - gripper_;
  grasped_ = !config_.fingers_locked && !fallen_ && finger_ <= config_.object_top() + 1e-12 &&
             rel.head<2>().norm() < config_.grasp_tolerance && std::abs(rel.z()) < config_.grasp_tolerance;
  return true;
}

}  // namespace rpl::envs
