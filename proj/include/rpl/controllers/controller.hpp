#pragma once

#include <memory>
#include <string>

#include "rpl/envs/goal_env.hpp"

namespace rpl::controllers {

using envs::Observation;
using envs::Vec;

// Initial policy: maps an observation (state and desired goal) to an action
// in [-1, 1]^action_dim. Implementations keep no state between calls apart
// from diagnostics, so one instance can serve any number of episodes.
class Controller {
 public:
  virtual ~Controller() = default;

  virtual std::string name() const = 0;
  virtual int action_dim() const = 0;
  virtual Vec act(const Observation& obs) = 0;
  // Independent copy for another rollout worker.
  virtual std::unique_ptr<Controller> clone() const = 0;
  // Index of the cascade rule used by the last act() call, or -1.
  virtual int last_rule() const { return -1; }
};

// Always returns the zero action.
class NullController : public Controller {
 public:
  explicit NullController(int action_dim) : action_dim_(action_dim) {}
  std::string name() const override { return "null"; }
  int action_dim() const override { return action_dim_; }
  Vec act(const Observation&) override { return Vec::Zero(action_dim_); }
  std::unique_ptr<Controller> clone() const override { return std::make_unique<NullController>(*this); }

 private:
  int action_dim_;
};

}  // namespace rpl::controllers
