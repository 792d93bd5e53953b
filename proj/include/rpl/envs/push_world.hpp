#pragma once

#include <string>
#include <vector>

#include "rpl/envs/goal_env.hpp"
#include "rpl/envs/planar.hpp"

namespace rpl::envs {

// State vector layout shared by the push, pick-and-place and hook worlds.
namespace layout {
inline constexpr int kGripperPos = 0;   // x, y, z
inline constexpr int kGripperVel = 3;   // vx, vy, vz
inline constexpr int kObjectPos = 6;    // x, y, z
inline constexpr int kObjectYaw = 9;
inline constexpr int kObjectVel = 10;   // vx, vy, vz
inline constexpr int kObjectRel = 13;   // object - gripper
inline constexpr int kFingerWidth = 16;
inline constexpr int kFingerVel = 17;
inline constexpr int kPushStateDim = 18;
inline constexpr int kHookPos = 18;     // grasp point x, y, z
inline constexpr int kHookYaw = 21;
inline constexpr int kHookVel = 22;
inline constexpr int kHookRel = 25;     // hook - gripper
inline constexpr int kHookStateDim = 28;
}  // namespace layout

struct PushConfig {
  std::string task = "push";
  int horizon = 50;
  double gamma = 0.98;
  double mu = 1.0;                // sliding friction coefficient
  double gravity = 9.81;
  double success_radius = 0.05;
  double gain = 0.05;             // metres of gripper travel per unit action
  double dt = 0.04;               // seconds per environment step
  int substeps = 10;
  Rect table{0.0, 0.0, 1.0, 1.0};
  double object_half_extent = 0.025;
  double object_mass = 1.0;
  double gripper_radius = 0.015;
  double gripper_z_max = 0.3;
  Vec3 gripper_start{0.5, 0.5, 0.1};
  double spawn_range = 0.15;      // object and goal xy drawn within +-range of table centre
  double min_separation = 0.08;   // object-goal and object-gripper minimum xy distance at reset
  // Fingers. Locked fingers ignore the fourth action component.
  bool fingers_locked = true;
  double finger_rate = 0.01;      // width change per unit action per step
  double finger_max = 0.08;
  double grasp_tolerance = 0.02;
  double release_margin = 0.015;
  // Pick-and-place: probability that the goal is lifted above the table.
  double air_goal_prob = 0.0;
  double max_goal_height = 0.3;

  double object_rest_z() const { return object_half_extent; }
  double object_top() const { return 2.0 * object_half_extent; }
};

PushConfig push_task_config();
PushConfig slippery_push_task_config();
PushConfig pick_and_place_task_config();

// Quasi-static planar pushing with a position-controlled gripper. The object
// is a disc footprint that decelerates at mu * g while sliding, and the
// gripper hands its velocity to the object along the contact normal.
class PlanarPushWorld : public GoalEnv {
 public:
  explicit PlanarPushWorld(PushConfig config);

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return config_.task; }
  const PushConfig& config() const { return config_; }

  Observation reset(std::uint64_t seed) override;
  StepResult step(const Vec& action) override;
  double compute_reward(const Vec& achieved, const Vec& desired) const override;
  Vec achieved_goal_of(const Vec& state) const override;
  Observation observe() const override;
  int step_index() const override { return step_; }
  bool restore(const Observation& obs) override;
  std::unique_ptr<GoalEnv> clone() const override { return std::make_unique<PlanarPushWorld>(*this); }

  // Direct state access for tests and scripted setups.
  Vec3 gripper() const { return gripper_; }
  Vec3 object() const { return object_; }
  Vec2 object_velocity() const { return object_vel_; }
  Vec3 goal() const { return goal_; }
  bool fallen() const { return fallen_; }
  bool grasped() const { return grasped_; }
  void place(const Vec3& gripper, const Vec3& object, const Vec3& goal);
  void set_bumps(std::vector<Bump> bumps) { bumps_ = std::move(bumps); }
  const std::vector<Bump>& bumps() const { return bumps_; }

 private:
  void substep(const Vec3& delta, const Vec3& grip_vel, double h);
  void move_object(const Vec2& d);
  void slide_object(double h);
  void update_fingers(double command);

  PushConfig config_;
  EnvSpec spec_;
  std::vector<Bump> bumps_;
  int step_ = 0;
  Vec3 gripper_ = Vec3::Zero();
  Vec3 gripper_vel_ = Vec3::Zero();
  Vec3 object_ = Vec3::Zero();
  Vec2 object_vel_ = Vec2::Zero();
  double object_vz_ = 0.0;
  double yaw_ = 0.0;
  Vec3 goal_ = Vec3::Zero();
  bool fallen_ = false;
  bool grasped_ = false;
  double finger_ = 0.0;
  double finger_vel_ = 0.0;
};

}  // namespace rpl::envs
