#include "rpl/envs/dense_arm.hpp"

#include <cmath>

#include "rpl/common/error.hpp"
#include "rpl/common/random.hpp"

namespace rpl::envs {

DenseArmWorld::DenseArmWorld(ArmConfig config) : config_(std::move(config)) {
  if (config_.horizon < 1) throw ContractError("DenseArmWorld: horizon must be >= 1");
  require(config_.mu > 0.0 && config_.dt > 0.0 && config_.substeps >= 1, "DenseArmWorld: bad physics settings");
  spec_.state_dim = arm_layout::kStateDim;
  spec_.action_dim = 3;
  spec_.goal_dim = 2;
  spec_.horizon = config_.horizon;
  spec_.gamma = config_.gamma;
  spec_.sparse_reward = false;
  reset(0);
}

Vec2 DenseArmWorld::tip_of(const Eigen::Vector3d& q) const {
  Vec2 p = config_.base;
  double angle = 0.0;
  for (int i = 0; i < 3; ++i) {
    angle += q(i);
    p += config_.links[i] * Vec2(std::cos(angle), std::sin(angle));
  }
  return p;
}

Eigen::Matrix<double, 2, 3> DenseArmWorld::jacobian(const Eigen::Vector3d& q) const {
  Eigen::Matrix<double, 2, 3> j = Eigen::Matrix<double, 2, 3>::Zero();
  double angle = 0.0;
  for (int i = 0; i < 3; ++i) {
    angle += q(i);
    const Vec2 d = config_.links[i] * Vec2(-std::sin(angle), std::cos(angle));
    for (int k = 0; k <= i; ++k) j.col(k) += d;
  }
  return j;
}

Observation DenseArmWorld::reset(std::uint64_t seed) {
  Rng rng(seed);
  step_ = 0;
  for (int i = 0; i < 3; ++i) q_(i) = config_.q_start[i] + rng.uniform(-config_.q_jitter, config_.q_jitter);
  dq_.setZero();
  const double j = config_.cylinder_jitter;
  cylinder_ = config_.cylinder_start + Vec2(rng.uniform(-j, j), rng.uniform(-j, j));
  cylinder_vel_.setZero();
  return observe();
}

StepResult DenseArmWorld::step(const Vec& action) {
  require(step_ < config_.horizon, "step: episode already reached its horizon");
  require(action.size() == spec_.action_dim, "step: action has wrong dimension");
  require(action.allFinite(), "step: action must be finite");
  ++step_calls_;
  const Vec a = clip_action(action);
  dq_ = config_.joint_damping * dq_ + (1.0 - config_.joint_damping) * config_.max_joint_speed * a;
  const double h = config_.dt / config_.substeps;
  const double decel = config_.mu * config_.gravity;
  for (int s = 0; s < config_.substeps; ++s) {
    const Vec2 prev_tip = tip_of(q_);
    q_ += h * dq_;
    const Vec2 tip = tip_of(q_);
    const Vec2 tip_vel = (tip - prev_tip) / h;
    Vec2 n;
    double pen = 0.0;
    if (disc_contact(tip, config_.tip_radius, cylinder_, config_.cylinder_radius, &n, &pen)) {
      cylinder_ += n * pen;
      const double vn = cylinder_vel_.dot(n);
      const double gn = tip_vel.dot(n);
      if (gn > vn) cylinder_vel_ += (gn - vn) * n;
    }
    const double speed = cylinder_vel_.norm();
    if (speed > 0.0) {
      const Vec2 dir = cylinder_vel_ / speed;
      if (decel * h >= speed) {
        cylinder_ += dir * (speed * speed / (2.0 * decel));
        cylinder_vel_.setZero();
      } else {
        cylinder_ += (cylinder_vel_ - 0.5 * decel * h * dir) * h;
        cylinder_vel_ -= decel * h * dir;
      }
    }
  }
  ++step_;
  StepResult result;
  result.observation = observe();
  result.reward = dense_reward(result.observation.state, a);
  result.step_index = step_;
  return result;
}

double DenseArmWorld::dense_reward(const Vec& state, const Vec& action) const {
  require(state.size() == arm_layout::kStateDim, "dense_reward: state has wrong dimension");
  const Vec2 cyl = state.segment<2>(arm_layout::kCylinder);
  const Vec2 goal = state.segment<2>(arm_layout::kGoal);
  const Vec2 tip = state.segment<2>(arm_layout::kTip);
  return -config_.w_goal * (cyl - goal).lpNorm<1>() - config_.w_tip * (tip - cyl).lpNorm<1>() -
         config_.w_action * action.norm();
}

double DenseArmWorld::compute_reward(const Vec& achieved, const Vec& desired) const {
  require(achieved.size() == desired.size(), "compute_reward: goal lengths differ");
  return -config_.w_goal * (achieved - desired).lpNorm<1>();
}

Vec DenseArmWorld::achieved_goal_of(const Vec& state) const {
  require(state.size() >= arm_layout::kCylinder + 2, "achieved_goal_of: state too short");
  return state.segment<2>(arm_layout::kCylinder);
}

bool DenseArmWorld::is_success(const Observation& final_obs, double) const {
  return (final_obs.achieved_goal - final_obs.desired_goal).norm() < config_.success_radius;
}

Observation DenseArmWorld::observe() const {
  Vec s(arm_layout::kStateDim);
  s.segment<3>(arm_layout::kJoints) = q_;
  s.segment<3>(arm_layout::kJointVel) = dq_;
  s.segment<2>(arm_layout::kTip) = tip_of(q_);
  s.segment<2>(arm_layout::kCylinder) = cylinder_;
  s.segment<2>(arm_layout::kCylinderVel) = cylinder_vel_;
  s.segment<2>(arm_layout::kGoal) = config_.goal;
  Observation obs;
  obs.achieved_goal = cylinder_;
  obs.desired_goal = config_.goal;
  obs.state = std::move(s);
  obs.step_index = step_;
  return obs;
}

bool DenseArmWorld::restore(const Observation& obs) {
  if (obs.state.size() != arm_layout::kStateDim || obs.step_index < 0 || obs.step_index > config_.horizon)
    return false;
  step_ = obs.step_index;
  q_ = obs.state.segment<3>(arm_layout::kJoints);
  dq_ = obs.state.segment<3>(arm_layout::kJointVel);
  cylinder_ = obs.state.segment<2>(arm_layout::kCylinder);
  cylinder_vel_ = obs.state.segment<2>(arm_layout::kCylinderVel);
  return true;
}

}  // namespace rpl::envs
