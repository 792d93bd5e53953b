#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rpl/agent/config.hpp"
#include "rpl/agent/ddpg.hpp"
#include "rpl/agent/policy.hpp"
#include "rpl/agent/replay.hpp"
#include "rpl/agent/rollout.hpp"
#include "rpl/controllers/controller.hpp"
#include "rpl/envs/goal_env.hpp"

namespace rpl::agent {

// Per-cycle instrumentation.
struct CycleStats {
  double critic_loss_mean = 0.0;  // window fed to the burn-in gate
  bool actor_updated = false;
  std::uint64_t actor_fingerprint_before = 0;
  std::uint64_t actor_fingerprint_after = 0;
  bool gate_open_after = false;
  int episodes = 0;
  int successes = 0;
  long env_steps = 0;
};

// Goal-conditioned DDPG + HER training loop for one method and one seed.
// Collection runs on `workers` environment copies (threads when more than
// one); each completed episode is stored, in worker order, by this object.
class Trainer {
 public:
  // `base` is required for rpl and expert_explore and ignored for scratch.
  Trainer(Method method, const envs::GoalEnv& env, const controllers::Controller* base, AgentConfig config,
          std::uint64_t seed);
  ~Trainer();
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  CycleStats run_cycle();
  // Deterministic evaluation on evaluation_seed(eval_seed, i).
  EvalResult evaluate(int n, std::uint64_t eval_seed, bool keep_trajectories = false);

  Method method() const { return method_; }
  const AgentConfig& config() const { return config_; }
  const DdpgParams& ddpg_params() const { return params_; }
  const ActorCritic& actor_critic() const { return ac_; }
  const Normalizers& normalizers() const { return norms_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const BurnInGate& gate() const { return gate_; }
  bool uses_gate() const { return method_ == Method::rpl; }
  bool actor_frozen() const { return uses_gate() && !gate_.open(); }
  // True once the gate has stayed shut for burn_in_warn_cycles readings.
  bool burn_in_stalled() const;
  long env_steps() const { return env_steps_; }
  long cycles() const { return cycles_; }
  const ExploreCounts& explore_counts() const { return counts_; }

  // Builds a normalized training batch from sampled transitions.
  TrainBatch make_batch(const std::vector<SampledTransition>& samples);

  // Checkpoint directory: actor.net, critic.net, actor_target.net,
  // critic_target.net, state_norm.txt, goal_norm.txt, trainer_state.txt and
  // replay.bin. Loading requires a trainer built with the same settings.
  void save(const std::string& dir) const;
  void load(const std::string& dir);

 private:
  struct Worker;

  void collect(std::vector<EpisodeResult>& out);
  void absorb(std::vector<EpisodeResult>& episodes, CycleStats& stats);

  Method method_;
  AgentConfig config_;
  std::uint64_t seed_;
  envs::EnvSpec spec_;
  std::unique_ptr<envs::GoalEnv> env_;  // reward function and evaluation
  std::unique_ptr<controllers::Controller> base_;
  DdpgParams params_;
  ActorCritic ac_;
  Normalizers norms_;
  ReplayBuffer buffer_;
  BurnInGate gate_;
  Rng sample_rng_;
  std::vector<std::unique_ptr<Worker>> workers_;
  ExploreSettings explore_;
  ExploreCounts counts_;
  long env_steps_ = 0;
  long cycles_ = 0;
  std::uint64_t next_episode_id_ = 0;
};

}  // namespace rpl::agent
