#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rpl::envs {

using Vec = Eigen::VectorXd;

struct Observation {
  Vec state;
  Vec achieved_goal;
  Vec desired_goal;
  int step_index = 0;  // environment steps taken before this observation
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  int step_index = 0;  // number of steps taken so far in the episode
};

struct EnvSpec {
  int state_dim = 0;
  int action_dim = 0;
  int goal_dim = 0;
  int horizon = 0;
  double gamma = 0.98;
  bool sparse_reward = true;
};

// Goal-conditioned episodic environment. Actions live in [-1, 1]^action_dim
// and are clipped on entry; every episode runs exactly `horizon` steps.
class GoalEnv {
 public:
  virtual ~GoalEnv() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual std::string name() const = 0;

  virtual Observation reset(std::uint64_t seed) = 0;
  // Throws ContractError when called after the horizon has been reached.
  virtual StepResult step(const Vec& action) = 0;

  // Pure: depends only on its arguments, so hindsight relabeling can call it.
  virtual double compute_reward(const Vec& achieved, const Vec& desired) const = 0;
  virtual Vec achieved_goal_of(const Vec& state) const = 0;
  // Success of a finished episode, judged from its last step.
  virtual bool is_success(const Observation& final_obs, double final_reward) const;

  virtual Observation observe() const = 0;
  virtual int step_index() const = 0;

  // Re-synchronises the simulator with an observation (used by model-based
  // controllers). Returns false when the observation does not determine the
  // simulator state.
  virtual bool restore(const Observation& obs);

  virtual std::unique_ptr<GoalEnv> clone() const = 0;

  // State components subject to sensor noise (object/tool poses), and a
  // hook to recompute fields derived from them (relative positions).
  virtual std::vector<int> noisy_components() const { return {}; }
  virtual void refresh_derived(Vec& /*state*/) const {}

  // Counts calls to step() since construction; used to audit planners.
  std::uint64_t step_calls() const { return step_calls_; }

 protected:
  std::uint64_t step_calls_ = 0;
};

bool episode_success(double final_reward);

// Sparse indicator: 1 iff ||achieved - desired|| < radius (strict).
double sparse_goal_reward(const Vec& achieved, const Vec& desired, double radius);

Vec clip_action(const Vec& action);

// One record per step: the state the action was taken in, the action, the
// resulting reward and the achieved goal it was computed from.
struct TrajectoryStep {
  int step = 0;
  Vec state;
  Vec action;
  double reward = 0.0;
  Vec achieved_goal;
  Vec desired_goal;

  bool operator==(const TrajectoryStep& o) const {
    return step == o.step && state == o.state && action == o.action && reward == o.reward &&
           achieved_goal == o.achieved_goal && desired_goal == o.desired_goal;
  }
};

using Trajectory = std::vector<TrajectoryStep>;

// Tab-separated decimal text, one line per step; vectors are written as
// comma-separated components.
void write_trajectory(const Trajectory& trajectory, std::ostream& os);

}  // namespace rpl::envs
