#include "rpl/agent/config.hpp"

#include <cmath>

#include "rpl/common/error.hpp"

namespace rpl::agent {

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("[agent] " + what);
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void AgentConfig::validate() const {
  check(std::isnan(gamma) || (gamma >= 0.0 && gamma < 1.0), "gamma must lie in [0, 1)");
  check(actor_lr > 0 && critic_lr > 0, "learning rates must be positive");
  check(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1 && adam_epsilon > 0,
        "adam constants out of range");
  check(probability(polyak), "polyak must lie in [0, 1]");
  check(batch_size >= 1 && cycles_per_epoch >= 1 && batches_per_cycle >= 0, "batch and cycle counts must be positive");
  check(test_rollouts >= 1 && rollout_batch_size >= 1 && workers >= 1, "rollout counts must be positive");
  check(buffer_size >= 1, "buffer_size must be positive");
  check(!hidden.empty(), "hidden must list at least one layer");
  for (int h : hidden) check(h >= 1, "hidden layer sizes must be positive");
  check(probability(random_action_prob), "random_action_prob must lie in [0, 1]");
  check(std::isnan(noise_scale) || noise_scale >= 0, "noise_scale must be non-negative");
  check(probability(her_prob), "her_prob must lie in [0, 1]");
  check(action_l2 >= 0, "action_l2 must be non-negative");
  check(burn_in_beta >= 0, "burn_in_beta must be non-negative");
  check(burn_in_warn_cycles >= 1, "burn_in_warn_cycles must be positive");
  check(probability(explore_epsilon) && probability(explore_alpha), "explore_epsilon and explore_alpha must lie in [0, 1]");
  check(history_length == 0 || history_length == 1, "history_length must be 0 or 1");
  check(clip_obs > 0 && clip_norm > 0 && norm_eps > 0, "normalizer clip ranges must be positive");
}

AgentConfig agent_config_from(const ConfigSection& s) {
  AgentConfig c;
  c.gamma = s.get_double("gamma", c.gamma);
  const double lr = s.get_double("lr", c.actor_lr);
  c.actor_lr = s.get_double("actor_lr", lr);
  c.critic_lr = s.get_double("critic_lr", lr);
  c.adam_beta1 = s.get_double("adam_beta1", c.adam_beta1);
  c.adam_beta2 = s.get_double("adam_beta2", c.adam_beta2);
  c.adam_epsilon = s.get_double("adam_epsilon", c.adam_epsilon);
  c.polyak = s.get_double("polyak", c.polyak);
  c.batch_size = static_cast<int>(s.get_int("batch_size", c.batch_size));
  c.cycles_per_epoch = static_cast<int>(s.get_int("cycles_per_epoch", c.cycles_per_epoch));
  c.batches_per_cycle = static_cast<int>(s.get_int("batches_per_cycle", c.batches_per_cycle));
  c.test_rollouts = static_cast<int>(s.get_int("test_rollouts", c.test_rollouts));
  c.rollout_batch_size = static_cast<int>(s.get_int("rollout_batch_size", c.rollout_batch_size));
  c.workers = static_cast<int>(s.get_int("workers", c.workers));
  const long long buffer = s.get_int("buffer_size", static_cast<long long>(c.buffer_size));
  check(buffer >= 1, "buffer_size must be positive");
  c.buffer_size = static_cast<std::size_t>(buffer);
  if (s.has("hidden")) {
    c.hidden.clear();
    for (long long h : s.get_ints("hidden", {})) c.hidden.push_back(static_cast<int>(h));
  }
  c.random_action_prob = s.get_double("random_action_prob", c.random_action_prob);
  c.noise_scale = s.get_double("noise_scale", c.noise_scale);
  c.her_prob = s.get_double("her_prob", c.her_prob);
  c.her_strategy = parse_her_strategy(s.get_string("her_strategy", to_string(c.her_strategy)));
  c.action_l2 = s.get_double("action_l2", c.action_l2);
  const std::string l2 = s.get_string("action_l2_target", "residual");
  if (l2 == "composed")
    c.action_l2_target = L2Target::composed;
  else if (l2 == "residual")
    c.action_l2_target = L2Target::residual;
  else
    throw ConfigError("[agent] action_l2_target must be 'composed' or 'residual'");
  const std::string critic_action = s.get_string("critic_action", "residual");
  if (critic_action != "composed" && critic_action != "residual")
    throw ConfigError("[agent] critic_action must be 'composed' or 'residual'");
  c.critic_on_residual = critic_action == "residual";
  c.burn_in_beta = s.get_double("burn_in_beta", c.burn_in_beta);
  c.burn_in_warn_cycles = static_cast<long>(s.get_int("burn_in_warn_cycles", c.burn_in_warn_cycles));
  c.explore_epsilon = s.get_double("explore_epsilon", c.explore_epsilon);
  c.explore_alpha = s.get_double("explore_alpha", c.explore_alpha);
  c.history_length = static_cast<int>(s.get_int("history_length", c.history_length));
  c.clip_target = s.get_bool("clip_target", c.clip_target);
  c.clip_obs = s.get_double("clip_obs", c.clip_obs);
  c.clip_norm = s.get_double("clip_norm", c.clip_norm);
  c.norm_eps = s.get_double("norm_eps", c.norm_eps);
  c.validate();
  return c;
}

}  // namespace rpl::agent
