#pragma once

#include "rpl/controllers/controller.hpp"
#include "rpl/envs/hook_world.hpp"
#include "rpl/envs/planar.hpp"

namespace rpl::controllers {

using envs::Vec2;
using envs::Vec3;

// Point behind the object on the goal-object line, `object_radius` beyond the
// object centre. Returns object_pos when object and goal coincide.
Vec push_location(const Vec& object_pos, const Vec& goal_pos, double object_radius);

struct ReactiveParams {
  double distance_threshold = 0.01;       // "at a location" test, metres
  double gain_scale = 5.0;                // action units per metre of desired displacement
  double miscalibration_multiplier = 1.0;
  // Geometry of the push family.
  double object_radius = 0.025;           // footprint radius used by the "between" test
  double push_offset = 0.025 * 1.7320508075688772;  // circumscribed-sphere radius of the cube
  double push_height = 0.025;
  double hover_height = 0.1;
  double grasp_tolerance = 0.015;
  double object_width = 0.05;
};

// Cascade rule indices follow the order in which the rules are checked.
namespace push_rule {
inline constexpr int kAtTarget = 1, kPush = 2, kDescend = 3, kApproach = 4;
}
namespace pick_rule {
inline constexpr int kAtTarget = 1, kCarry = 2, kClose = 3, kOpen = 5, kDescend = 6, kApproach = 7;
}
namespace hook_rule {
inline constexpr int kAtTarget = 1, kGraspHook = 2, kPosition = 3, kSweep = 4;
}

Vec reactive_push(const Observation& obs, const ReactiveParams& p, int* rule = nullptr);
Vec reactive_pick_and_place(const Observation& obs, const ReactiveParams& p, int* rule = nullptr);

struct HookParams {
  ReactiveParams base;
  envs::HookGeometry geometry;
  double lift_height = 0.1;      // gripper height while carrying the hook over the object
  double lifted_margin = 0.01;   // hook counts as lifted this far above its resting height
  double sweep_lift = 0.02;      // hook height above rest while sweeping, below the object top
  double clearance = 0.01;       // gap kept between hook and object while positioning
};

// Defaults scaled to a hook world of the given geometry.
HookParams hook_params_for(const envs::HookWorld& world);

Vec reactive_hook(const Observation& obs, const HookParams& p, int* rule = nullptr);

class ReactivePush : public Controller {
 public:
  explicit ReactivePush(ReactiveParams p = {}) : p_(p) {}
  std::string name() const override { return "reactive_push"; }
  int action_dim() const override { return 4; }
  Vec act(const Observation& obs) override { return reactive_push(obs, p_, &rule_); }
  std::unique_ptr<Controller> clone() const override { return std::make_unique<ReactivePush>(*this); }
  int last_rule() const override { return rule_; }
  const ReactiveParams& params() const { return p_; }

 private:
  ReactiveParams p_;
  int rule_ = -1;
};

class ReactivePickAndPlace : public Controller {
 public:
  explicit ReactivePickAndPlace(ReactiveParams p = {}) : p_(p) {}
  std::string name() const override { return "reactive_pick_and_place"; }
  int action_dim() const override { return 4; }
  Vec act(const Observation& obs) override { return reactive_pick_and_place(obs, p_, &rule_); }
  std::unique_ptr<Controller> clone() const override { return std::make_unique<ReactivePickAndPlace>(*this); }
  int last_rule() const override { return rule_; }
  const ReactiveParams& params() const { return p_; }

 private:
  ReactiveParams p_;
  int rule_ = -1;
};

class ReactiveHook : public Controller {
 public:
  explicit ReactiveHook(HookParams p) : p_(p) {}
  std::string name() const override { return "reactive_hook"; }
  int action_dim() const override { return 4; }
  Vec act(const Observation& obs) override { return reactive_hook(obs, p_, &rule_); }
  std::unique_ptr<Controller> clone() const override { return std::make_unique<ReactiveHook>(*this); }
  int last_rule() const override { return rule_; }
  const HookParams& params() const { return p_; }

 private:
  HookParams p_;
  int rule_ = -1;
};

}  // namespace rpl::controllers
