#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "rpl/common/config.hpp"
#include "rpl/envs/goal_env.hpp"

namespace rpl::envs {

// Environment construction parameters. Unset numeric fields (NaN or 0
// horizon) take the named task's defaults.
struct TaskConfig {
  std::string name = "push";
  int horizon = 0;
  double mu = std::numeric_limits<double>::quiet_NaN();
  double noise_std = std::numeric_limits<double>::quiet_NaN();
  double scale = std::numeric_limits<double>::quiet_NaN();  // hook tasks only
  std::vector<double> bump_count_probs;                      // hook tasks only
  std::uint64_t seed = 0;  // mixed into every episode seed drawn for this task
};

const std::vector<std::string>& task_names();
bool is_push_family(const std::string& task);
bool is_hook_family(const std::string& task);

// Reads name, horizon, mu, noise_std, scale, bump_count_probs and seed.
TaskConfig task_config_from(const ConfigSection& section);

// Throws ConfigError for unknown task names or out-of-range parameters.
std::unique_ptr<GoalEnv> make_env(const TaskConfig& config);

// Default observation noise for the noisy hook task (variance 0.025).
double default_noise_std();
double default_hook_scale();

}  // namespace rpl::envs
