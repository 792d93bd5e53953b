#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rpl/agent/ddpg.hpp"
#include "rpl/agent/replay.hpp"
#include "rpl/common/config.hpp"

namespace rpl::agent {

// Training hyperparameters. NaN fields resolve per task: gamma from the
// environment, noise_scale to 0.1 on hook tasks and 0.2 elsewhere.
struct AgentConfig {
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double polyak = 0.95;
  int batch_size = 256;
  int cycles_per_epoch = 50;
  int batches_per_cycle = 40;
  int test_rollouts = 50;
  int rollout_batch_size = 4;
  int workers = 1;
  std::size_t buffer_size = 1000000;
  std::vector<int> hidden = {256, 256, 256};
  double random_action_prob = 0.3;
  double noise_scale = std::numeric_limits<double>::quiet_NaN();
  double her_prob = 0.8;
  HerStrategy her_strategy = HerStrategy::future;
  double action_l2 = 1.0;
  L2Target action_l2_target = L2Target::residual;
  bool critic_on_residual = true;  // residual methods: critic sees a - base
  double burn_in_beta = 1.0;
  long burn_in_warn_cycles = 500;
  double explore_epsilon = 0.6;
  double explore_alpha = 0.8;
  int history_length = 0;
  bool clip_target = true;  // sparse tasks only
  double clip_obs = 200.0;
  double clip_norm = 5.0;
  double norm_eps = 0.01;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// Reads the [agent] section; unknown keys are rejected by the caller.
AgentConfig agent_config_from(const ConfigSection& section);

}  // namespace rpl::agent
