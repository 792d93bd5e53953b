#pragma once

#include "rpl/controllers/controller.hpp"
#include "rpl/envs/dense_arm.hpp"

namespace rpl::controllers {

struct ArmTeacherParams {
  double at_goal = 0.03;        // stop once the cylinder is this close to the goal
  double standoff = 0.03;       // gap behind the cylinder before pushing
  double max_tip_speed = 0.5;   // m/s
  double tip_gain = 4.0;        // 1/s, proportional gain on tip position error
  double damping = 0.05;        // damped least-squares regulariser
};

// Scripted teacher for the dense arm task: steers the fingertip behind the
// cylinder, then pushes along the cylinder-goal line. Cartesian tip
// velocities are mapped to joint commands by damped least squares.
class ArmPushTeacher : public Controller {
 public:
  explicit ArmPushTeacher(envs::ArmConfig config = {}, ArmTeacherParams params = {});
  std::string name() const override { return "arm_teacher"; }
  int action_dim() const override { return 3; }
  Vec act(const Observation& obs) override;
  std::unique_ptr<Controller> clone() const override { return std::make_unique<ArmPushTeacher>(*this); }
  int last_rule() const override { return rule_; }

 private:
  envs::DenseArmWorld kinematics_;
  ArmTeacherParams p_;
  int rule_ = -1;
};

}  // namespace rpl::controllers
