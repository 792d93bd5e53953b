#include "rpl/agent/replay.hpp"

#include "rpl/common/error.hpp"

namespace rpl::agent {

HerStrategy parse_her_strategy(const std::string& name) {
  if (name == "future") return HerStrategy::future;
  if (name == "final") return HerStrategy::final;
  throw ConfigError("her_strategy must be 'future' or 'final', got '" + name + "'");
}

std::string to_string(HerStrategy s) { return s == HerStrategy::future ? "future" : "final"; }

ReplayBuffer::ReplayBuffer(int horizon, std::size_t capacity_transitions)
    : horizon_(horizon), capacity_(capacity_transitions) {
  require(horizon >= 1, "ReplayBuffer: horizon must be >= 1");
  require(capacity_transitions >= static_cast<std::size_t>(horizon),
          "ReplayBuffer: capacity must hold at least one episode");
}

void ReplayBuffer::store_episode(Episode episode) {
  if (static_cast<int>(episode.size()) != horizon_)
    throw ContractError("store_episode: episode has " + std::to_string(episode.size()) + " steps, expected " +
                        std::to_string(horizon_));
  for (int t = 0; t < horizon_; ++t)
    require(episode[t].step_index == t, "store_episode: step indices must run 0..horizon-1");
  episodes_.push_back(std::move(episode));
  ++stored_;
  while (num_transitions() > capacity_) episodes_.pop_front();
}

std::vector<SampledTransition> her_sample(const ReplayBuffer& buffer, int batch_size, double her_prob,
                                          HerStrategy strategy, const RewardFn& reward, Rng& rng) {
  if (buffer.num_episodes() == 0) throw ContractError("her_sample: replay buffer is empty");
  require(batch_size >= 1, "her_sample: batch_size must be >= 1");
  require(her_prob >= 0.0 && her_prob <= 1.0, "her_sample: her_prob must lie in [0, 1]");
  const int horizon = buffer.horizon();
  std::vector<SampledTransition> batch(batch_size);
  for (SampledTransition& s : batch) {
    s.episode = rng.index(buffer.num_episodes());
    s.step = static_cast<int>(rng.index(horizon));
    const Episode& ep = buffer.episode(s.episode);
    s.transition = &ep[s.step];
    if (rng.uniform() < her_prob) {
      s.relabeled = true;
      s.goal_step = strategy == HerStrategy::final ? horizon - 1
                                                   : s.step + static_cast<int>(rng.index(horizon - s.step));
      s.goal = ep[s.goal_step].achieved_goal_next;
      s.reward = reward(s.transition->achieved_goal_next, s.goal);
    } else {
      s.goal = s.transition->desired_goal;
      s.reward = s.transition->reward;
    }
  }
  return batch;
}

}  // namespace rpl::agent
