#pragma once

#include <string>
#include <vector>

#include "rpl/envs/goal_env.hpp"
#include "rpl/envs/planar.hpp"
#include "rpl/envs/push_world.hpp"

namespace rpl::envs {

// Hook tasks. Lengths, gains and the step duration are given for a 1 m desk
// and multiplied by `scale`, so velocities are scale-invariant while the
// arena grows relative to fixed-size sensor noise.
struct HookConfig {
  std::string task = "hook";
  int horizon = 100;
  double gamma = 0.98;
  double scale = 1.0;
  double mu = 1.0;
  double gravity = 9.81;
  double success_radius = 0.05;
  double gain = 0.05;
  double dt = 0.04;
  int substeps = 10;
  Rect table{0.0, 0.0, 1.0, 1.0};
  double reach_y = 0.45;          // gripper cannot move beyond this y
  double object_half_extent = 0.025;
  double object_height = 0.05;    // fixed, so goal heights do not depend on the object
  double object_mass = 1.0;
  double gripper_radius = 0.015;
  double gripper_z_max = 0.3;
  Vec3 gripper_start{0.5, 0.15, 0.1};
  Vec2 hook_start{0.8, 0.2};
  double hook_jitter = 0.0;
  double shaft_length = 0.35;
  double head_length = 0.12;
  double hook_radius = 0.01;      // half thickness of shaft and head
  double handle_width = 0.02;     // finger width when holding the hook
  double object_x_min = 0.3, object_x_max = 0.6;
  double object_y_min = 0.55, object_y_max = 0.7;
  double goal_dx_min = -0.1, goal_dx_max = 0.0;  // goal x relative to object x
  double goal_y_min = 0.4;       // keeps goals within the hook head's travel
  double goal_min_separation = 0.12;
  double finger_rate = 0.01;
  double finger_max = 0.08;
  double grasp_tolerance = 0.04;
  double release_margin = 0.015;
  // Per-episode hidden randomisation (complex objects).
  bool randomize_object = false;
  double mass_min = 0.1, mass_max = 2.0;
  double mu_min = 0.1, mu_max = 1.5;
  double extent_min = 0.02, extent_max = 0.08;
  // Probability of k bumps is bump_count_probs[k]; empty means no bumps.
  std::vector<double> bump_count_probs;
  double bump_half_min = 0.03, bump_half_max = 0.1;
  double bump_height_min = 0.02, bump_height_max = 0.1;

  // Copy with every length, gain and the step duration multiplied by scale.
  HookConfig scaled() const;
  double object_rest_z() const { return 0.5 * object_height; }
};

HookConfig hook_task_config();
HookConfig noisy_hook_task_config();
HookConfig complex_hook_task_config();

// Hook geometry in world units, shared with the scripted hook controller.
struct HookGeometry {
  double scale = 1;
  double shaft_length = 0;
  double head_length = 0;
  double hook_radius = 0;
  double handle_width = 0;
  double object_radius = 0;
  double object_height = 0;
  double hook_rest_z = 0;
  double grasp_tolerance = 0;
  double gain = 0;
  double reach_y = 0;
};

class HookWorld : public GoalEnv {
 public:
  explicit HookWorld(HookConfig config);

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return world_.task; }
  // Configuration in world units (after scaling).
  const HookConfig& config() const { return world_; }
  HookGeometry geometry() const;

  Observation reset(std::uint64_t seed) override;
  StepResult step(const Vec& action) override;
  double compute_reward(const Vec& achieved, const Vec& desired) const override;
  Vec achieved_goal_of(const Vec& state) const override;
  Observation observe() const override;
  int step_index() const override { return step_; }
  std::unique_ptr<GoalEnv> clone() const override { return std::make_unique<HookWorld>(*this); }
  std::vector<int> noisy_components() const override;
  void refresh_derived(Vec& state) const override;

  const std::vector<Bump>& bumps() const { return bumps_; }
  double object_radius() const { return object_radius_; }
  double object_mu() const { return object_mu_; }
  double object_mass() const { return object_mass_; }
  Vec3 object() const { return object_; }
  Vec3 hook() const { return hook_; }
  Vec3 gripper() const { return gripper_; }
  bool hook_grasped() const { return grasped_; }
  bool fallen() const { return fallen_; }

  // Hook segments (shaft, head) for a grasp point at `base`.
  std::pair<Vec2, Vec2> shaft(const Vec2& base) const;
  std::pair<Vec2, Vec2> head(const Vec2& base) const;

 private:
  void substep(const Vec3& delta, const Vec3& grip_vel, double h);
  bool hook_blocked(const Vec3& base) const;
  void push_object(const Vec2& normal, double penetration, const Vec2& pusher_vel);
  void move_object(const Vec2& d);
  void slide_object(double h);
  void update_fingers(double command);

  HookConfig unit_;
  HookConfig world_;
  EnvSpec spec_;
  std::vector<Bump> bumps_;
  int step_ = 0;
  Vec3 gripper_ = Vec3::Zero();
  Vec3 gripper_vel_ = Vec3::Zero();
  Vec3 object_ = Vec3::Zero();
  Vec2 object_vel_ = Vec2::Zero();
  double yaw_ = 0.0;
  Vec3 hook_ = Vec3::Zero();
  Vec3 hook_vel_ = Vec3::Zero();
  Vec3 goal_ = Vec3::Zero();
  bool grasped_ = false;
  bool fallen_ = false;
  double finger_ = 0.0;
  double finger_vel_ = 0.0;
  double object_radius_ = 0.0;
  double object_mu_ = 1.0;
  double object_mass_ = 1.0;
};

}  // namespace rpl::envs
