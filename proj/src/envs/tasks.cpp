#include "rpl/envs/tasks.hpp"

#include <cmath>

#include "rpl/common/error.hpp"
#include "rpl/envs/dense_arm.hpp"
#include "rpl/envs/hook_world.hpp"
#include "rpl/envs/noise.hpp"
#include "rpl/envs/push_world.hpp"

namespace rpl::envs {

double default_noise_std() { return std::sqrt(0.025); }

double default_hook_scale() { return 6.0; }

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {"push",       "slippery_push", "pick_and_place", "hook",
                                                 "noisy_hook", "complex_hook",  "dense_arm"};
  return names;
}

bool is_push_family(const std::string& task) {
  return task == "push" || task == "slippery_push" || task == "pick_and_place";
}

bool is_hook_family(const std::string& task) {
  return task == "hook" || task == "noisy_hook" || task == "complex_hook";
}

TaskConfig task_config_from(const ConfigSection& section) {
  TaskConfig c;
  c.name = section.get_string("name", c.name);
  c.horizon = static_cast<int>(section.get_int("horizon", 0));
  c.mu = section.get_double("mu", c.mu);
  c.noise_std = section.get_double("noise_std", c.noise_std);
  c.scale = section.get_double("scale", c.scale);
  c.bump_count_probs = section.get_doubles("bump_count_probs", {});
  const long long seed = section.get_int("seed", 0);
  if (seed < 0) throw ConfigError("[task] seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  return c;
}

namespace {

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("[task] " + message);
}

}  // namespace

std::unique_ptr<GoalEnv> make_env(const TaskConfig& c) {
  check(c.horizon >= 0, "horizon must be positive");
  check(std::isnan(c.mu) || c.mu > 0.0, "mu must be positive");
  check(std::isnan(c.noise_std) || c.noise_std >= 0.0, "noise_std must be non-negative");
  check(std::isnan(c.scale) || c.scale > 0.0, "scale must be positive");
  if (!is_hook_family(c.name)) {
    check(std::isnan(c.scale), "scale only applies to hook tasks");
    check(c.bump_count_probs.empty(), "bump_count_probs only applies to hook tasks");
  }
  std::unique_ptr<GoalEnv> env;
  double noise = 0.0;
  if (is_push_family(c.name)) {
    PushConfig p = c.name == "push" ? push_task_config()
                   : c.name == "slippery_push" ? slippery_push_task_config()
                                               : pick_and_place_task_config();
    if (c.horizon) p.horizon = c.horizon;
    if (!std::isnan(c.mu)) p.mu = c.mu;
    env = std::make_unique<PlanarPushWorld>(p);
  } else if (is_hook_family(c.name)) {
    HookConfig h = c.name == "hook" ? hook_task_config()
                   : c.name == "noisy_hook" ? noisy_hook_task_config()
                                            : complex_hook_task_config();
    h.scale = std::isnan(c.scale) ? default_hook_scale() : c.scale;
    if (c.horizon) h.horizon = c.horizon;
    if (!std::isnan(c.mu)) h.mu = c.mu;
    if (!c.bump_count_probs.empty()) {
      double total = 0.0;
      for (double p : c.bump_count_probs) {
        check(p >= 0.0, "bump_count_probs must be non-negative");
        total += p;
      }
      check(std::abs(total - 1.0) < 1e-9, "bump_count_probs must sum to 1");
      h.bump_count_probs = c.bump_count_probs;
    }
    if (c.name == "noisy_hook") noise = default_noise_std();
    env = std::make_unique<HookWorld>(h);
  } else if (c.name == "dense_arm") {
    ArmConfig a;
    if (c.horizon) a.horizon = c.horizon;
    if (!std::isnan(c.mu)) a.mu = c.mu;
    env = std::make_unique<DenseArmWorld>(a);
  } else {
    throw ConfigError("[task] unknown task '" + c.name + "'");
  }
  if (!std::isnan(c.noise_std)) noise = c.noise_std;
  if (noise > 0.0) env = std::make_unique<NoiseWrapper>(std::move(env), noise);
  return env;
}

}  // namespace rpl::envs
