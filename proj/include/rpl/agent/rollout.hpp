#pragma once

#include <cstdint>
#include <vector>

#include "rpl/agent/ddpg.hpp"
#include "rpl/agent/policy.hpp"
#include "rpl/agent/replay.hpp"
#include "rpl/envs/goal_env.hpp"

namespace rpl::agent {

// Read-only view of a policy for one rollout worker. `base` is the worker's
// own controller instance (needed by rpl, expert_explore, initial_only).
struct PolicyView {
  Method method = Method::rpl;
  const ActorCritic* ac = nullptr;
  const Normalizers* normalizers = nullptr;
  controllers::Controller* base = nullptr;
};

struct ExploreSettings {
  ExploreParams params;
  double epsilon = 0.6;
  double alpha = 0.8;
};

struct ExploreCounts {
  long random = 0, noisy = 0;                  // explore_act branches
  long expert = 0, ee_random = 0, learned = 0;  // Expert-Explore branches
};

struct EpisodeResult {
  Episode episode;
  envs::Trajectory trajectory;
  bool success = false;
  double final_reward = 0.0;
};

// Noise-free action of the policy. `prev` follows residual_act's rule.
Vec policy_act(const PolicyView& policy, const Observation& obs, const Observation* prev);

// Runs one full episode from env.reset(seed). With `explore` null the
// policy acts deterministically; otherwise exploration draws come from rng.
EpisodeResult run_episode(envs::GoalEnv& env, const PolicyView& policy, std::uint64_t seed,
                          const ExploreSettings* explore = nullptr, Rng* rng = nullptr,
                          bool record_trajectory = false, ExploreCounts* counts = nullptr);

// Reset seeds: training seeds have the top bit clear, evaluation seeds set.
std::uint64_t training_seed(std::uint64_t stream_seed, std::uint64_t episode);
std::uint64_t evaluation_seed(std::uint64_t seed, std::uint64_t episode);

struct EvalResult {
  double success_rate = 0.0;
  std::vector<envs::Trajectory> trajectories;
};

// n deterministic rollouts on evaluation_seed(seed, 0..n-1).
EvalResult evaluate(envs::GoalEnv& env, const PolicyView& policy, int n, std::uint64_t seed,
                    bool keep_trajectories = false);

}  // namespace rpl::agent
