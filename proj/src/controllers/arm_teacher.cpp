#include "rpl/controllers/arm_teacher.hpp"

#include <cmath>

#include "rpl/common/error.hpp"

namespace rpl::controllers {

namespace A = envs::arm_layout;
using envs::Vec2;

ArmPushTeacher::ArmPushTeacher(envs::ArmConfig config, ArmTeacherParams params)
    : kinematics_(std::move(config)), p_(params) {}

Vec ArmPushTeacher::act(const Observation& obs) {
  require(obs.state.size() == A::kStateDim, "arm_teacher: observation has wrong dimension");
  const envs::ArmConfig& c = kinematics_.config();
  const Eigen::Vector3d q = obs.state.segment<3>(A::kJoints);
  const Vec2 tip = obs.state.segment<2>(A::kTip);
  const Vec2 cyl = obs.state.segment<2>(A::kCylinder);
  const Vec2 goal = obs.state.segment<2>(A::kGoal);
  const Vec2 to_goal = goal - cyl;
  const double dist = to_goal.norm();
  if (dist < p_.at_goal) {
    rule_ = 1;
    return Vec::Zero(3);
  }
  const Vec2 u = to_goal / dist;
  const Vec2 perp(-u.y(), u.x());
  const double contact = c.cylinder_radius + c.tip_radius;
  const Vec2 rel = tip - cyl;
  const double along = rel.dot(u);
  const double lateral = rel.dot(perp);

  Vec2 v;
  if (along < -0.5 * contact && std::abs(lateral) < 0.5 * c.cylinder_radius) {
    rule_ = 2;  // behind the cylinder: push toward the goal, correcting drift off the line
    v = u * std::min(p_.max_tip_speed, p_.tip_gain * dist) - perp * (p_.tip_gain * lateral);
  } else {
    const Vec2 approach = cyl - u * (contact + p_.standoff);
    Vec2 target = approach;
    // Detour around the cylinder when the direct path would hit it.
    const Vec2 seg = approach - tip;
    const double len2 = seg.squaredNorm();
    const double t = len2 > 1e-12 ? std::clamp((cyl - tip).dot(seg) / len2, 0.0, 1.0) : 0.0;
    if ((tip + t * seg - cyl).norm() < contact + p_.standoff && along > -contact) {
      const double side = lateral >= 0.0 ? 1.0 : -1.0;
      target = cyl + perp * side * (contact + 2.0 * p_.standoff) - u * (contact + p_.standoff);
      rule_ = 3;
    } else {
      rule_ = 4;
    }
    v = p_.tip_gain * (target - tip);
  }
  if (v.norm() > p_.max_tip_speed) v *= p_.max_tip_speed / v.norm();
  const Eigen::Matrix<double, 2, 3> J = kinematics_.jacobian(q);
  const Eigen::Matrix2d JJt = J * J.transpose() + p_.damping * p_.damping * Eigen::Matrix2d::Identity();
  const Eigen::Vector3d dq = J.transpose() * JJt.ldlt().solve(v);
  Vec a = dq / c.max_joint_speed;
  return envs::clip_action(a);
}

}  // namespace rpl::controllers
