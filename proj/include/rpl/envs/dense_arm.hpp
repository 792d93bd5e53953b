#pragma once

#include <array>
#include <string>

#include "rpl/envs/goal_env.hpp"
#include "rpl/envs/planar.hpp"

namespace rpl::envs {

namespace arm_layout {
inline constexpr int kJoints = 0;      // q1, q2, q3
inline constexpr int kJointVel = 3;    // dq1, dq2, dq3
inline constexpr int kTip = 6;         // fingertip x, y
inline constexpr int kCylinder = 8;    // cylinder x, y
inline constexpr int kCylinderVel = 10;
inline constexpr int kGoal = 12;       // fixed goal x, y
inline constexpr int kStateDim = 14;
}  // namespace arm_layout

struct ArmConfig {
  std::string task = "dense_arm";
  int horizon = 150;
  double gamma = 0.98;
  std::array<double, 3> links{0.5, 0.4, 0.3};
  Vec2 base{0.0, 0.0};
  std::array<double, 3> q_start{0.2, 1.2, 1.0};
  double q_jitter = 0.05;
  double max_joint_speed = 2.0;   // rad/s for a unit action
  double joint_damping = 0.5;     // fraction of the previous joint velocity kept each step
  double dt = 0.05;
  int substeps = 5;
  double tip_radius = 0.02;
  double cylinder_radius = 0.05;
  double mu = 1.0;
  double gravity = 9.81;
  Vec2 cylinder_start{0.75, 0.35};
  double cylinder_jitter = 0.05;
  Vec2 goal{0.45, 0.75};
  double success_radius = 0.1;
  // Dense reward weights: goal distance, tip distance, action magnitude.
  double w_goal = 1.25, w_tip = 0.1, w_action = 0.5;
};

// Planar three-link arm that pushes a cylinder toward a fixed goal with its
// fingertip. Actions are joint velocity commands; the reward is dense.
class DenseArmWorld : public GoalEnv {
 public:
  explicit DenseArmWorld(ArmConfig config = {});

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return config_.task; }
  const ArmConfig& config() const { return config_; }

  Observation reset(std::uint64_t seed) override;
  StepResult step(const Vec& action) override;
  // Goal term of the dense reward; pure in its arguments.
  double compute_reward(const Vec& achieved, const Vec& desired) const override;
  Vec achieved_goal_of(const Vec& state) const override;
  bool is_success(const Observation& final_obs, double final_reward) const override;
  Observation observe() const override;
  int step_index() const override { return step_; }
  bool restore(const Observation& obs) override;
  std::unique_ptr<GoalEnv> clone() const override { return std::make_unique<DenseArmWorld>(*this); }

  double dense_reward(const Vec& state, const Vec& action) const;

  Vec2 tip_of(const Eigen::Vector3d& q) const;
  // 2x3 Jacobian of the fingertip position with respect to the joint angles.
  Eigen::Matrix<double, 2, 3> jacobian(const Eigen::Vector3d& q) const;
  Vec2 tip() const { return tip_of(q_); }
  Vec2 cylinder() const { return cylinder_; }

 private:
  ArmConfig config_;
  EnvSpec spec_;
  int step_ = 0;
  Eigen::Vector3d q_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d dq_ = Eigen::Vector3d::Zero();
  Vec2 cylinder_ = Vec2::Zero();
  Vec2 cylinder_vel_ = Vec2::Zero();
};

}  // namespace rpl::envs
