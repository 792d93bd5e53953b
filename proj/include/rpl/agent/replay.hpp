#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rpl/common/random.hpp"

namespace rpl::agent {

using Vec = Eigen::VectorXd;

struct Transition {
  Vec state;
  Vec prev_state;  // state one step earlier; equals `state` at step 0
  Vec action;      // executed (composed, clipped) action
  double reward = 0.0;
  Vec next_state;
  Vec achieved_goal;
  Vec achieved_goal_next;
  Vec desired_goal;
  Vec base_action;       // initial controller's action at (state, desired_goal), if any
  Vec base_action_next;  // same at (next_state, desired_goal)
  std::uint64_t episode_id = 0;
  int step_index = 0;
};

using Episode = std::vector<Transition>;

enum class HerStrategy { future, final };

HerStrategy parse_her_strategy(const std::string& name);
std::string to_string(HerStrategy s);

// One sampled transition, possibly relabeled with a hindsight goal.
struct SampledTransition {
  const Transition* transition = nullptr;
  std::size_t episode = 0;  // position in the buffer at sampling time
  int step = 0;
  bool relabeled = false;
  int goal_step = -1;  // step whose achieved_goal_next became the goal
  Vec goal;
  double reward = 0.0;
};

using RewardFn = std::function<double(const Vec& achieved, const Vec& desired)>;

// FIFO store of complete, equal-length episodes. Capacity is counted in
// transitions; the oldest episode is evicted first.
class ReplayBuffer {
 public:
  ReplayBuffer(int horizon, std::size_t capacity_transitions = 1000000);

  void store_episode(Episode episode);

  int horizon() const { return horizon_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t num_episodes() const { return episodes_.size(); }
  std::size_t num_transitions() const { return episodes_.size() * static_cast<std::size_t>(horizon_); }
  std::uint64_t episodes_stored() const { return stored_; }
  const Episode& episode(std::size_t i) const { return episodes_.at(i); }
  // Restores the lifetime counter after reloading a checkpoint.
  void set_episodes_stored(std::uint64_t n) { stored_ = n; }

 private:
  int horizon_;
  std::size_t capacity_;
  std::uint64_t stored_ = 0;
  std::deque<Episode> episodes_;
};

// Uniform over stored transitions. With probability her_prob a sample's goal
// becomes achieved_goal_next of a step t' >= t of the same episode (future:
// uniform over t..T-1, final: T-1) and its reward is recomputed.
std::vector<SampledTransition> her_sample(const ReplayBuffer& buffer, int batch_size, double her_prob,
                                          HerStrategy strategy, const RewardFn& reward, Rng& rng);

}  // namespace rpl::agent
