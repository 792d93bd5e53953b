#include "rpl/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rpl/common/error.hpp"
#include "rpl/controllers/arm_teacher.hpp"
#include "rpl/controllers/cache.hpp"
#include "rpl/controllers/mpc.hpp"
#include "rpl/controllers/reactive.hpp"
#include "rpl/envs/dense_arm.hpp"
#include "rpl/envs/hook_world.hpp"
#include "rpl/envs/noise.hpp"

namespace rpl::harness {

namespace {

const envs::GoalEnv& unwrap(const envs::GoalEnv& env) {
  if (const auto* noisy = dynamic_cast<const envs::NoiseWrapper*>(&env)) return unwrap(noisy->inner());
  return env;
}

template <class P>
void apply_overrides(P& p, const ControllerSpec& spec) {
  if (!std::isnan(spec.gain_scale)) p.gain_scale = spec.gain_scale;
  if (!std::isnan(spec.distance_threshold)) p.distance_threshold = spec.distance_threshold;
  if (!std::isnan(spec.miscalibration_multiplier)) p.miscalibration_multiplier = spec.miscalibration_multiplier;
}

ControllerSpec controller_from(const ConfigSection& s) {
  ControllerSpec c;
  c.name = s.get_string("name", "");
  c.gain_scale = s.get_double("gain_scale", c.gain_scale);
  c.distance_threshold = s.get_double("distance_threshold", c.distance_threshold);
  c.miscalibration_multiplier = s.get_double("miscalibration_multiplier", c.miscalibration_multiplier);
  c.expansions = static_cast<int>(s.get_int("expansions", c.expansions));
  c.teacher = s.get_string("teacher", "");
  const long long capacity = s.get_int("capacity", static_cast<long long>(c.capacity));
  const long long cache_seed = s.get_int("cache_seed", 0);
  c.cache_file = s.get_string("cache_file", "");
  if (s.has("sweep_sizes")) {
    c.sweep_sizes.clear();
    for (long long v : s.get_ints("sweep_sizes", {})) {
      if (v < 1) throw ConfigError("[controller] sweep_sizes must be positive");
      c.sweep_sizes.push_back(static_cast<std::size_t>(v));
    }
    if (c.sweep_sizes.empty()) throw ConfigError("[controller] sweep_sizes must not be empty");
  }
  c.sweep_trials = static_cast<int>(s.get_int("sweep_trials", c.sweep_trials));
  c.sweep_episodes = static_cast<int>(s.get_int("sweep_episodes", c.sweep_episodes));

  if (capacity < 1) throw ConfigError("[controller] capacity must be positive");
  if (cache_seed < 0) throw ConfigError("[controller] cache_seed must be non-negative");
  if (c.expansions < 1) throw ConfigError("[controller] expansions must be positive");
  if (c.sweep_trials < 1 || c.sweep_episodes < 1) throw ConfigError("[controller] sweep counts must be positive");
  if (!std::isnan(c.gain_scale) && !(c.gain_scale > 0)) throw ConfigError("[controller] gain_scale must be positive");
  if (!std::isnan(c.distance_threshold) && !(c.distance_threshold > 0))
    throw ConfigError("[controller] distance_threshold must be positive");
  if (!std::isnan(c.miscalibration_multiplier) && !(c.miscalibration_multiplier > 0))
    throw ConfigError("[controller] miscalibration_multiplier must be positive");
  c.capacity = static_cast<std::size_t>(capacity);
  c.cache_seed = static_cast<std::uint64_t>(cache_seed);
  return c;
}

}  // namespace

std::vector<std::string> controller_names() {
  return {"reactive_push", "reactive_pick_and_place", "reactive_hook", "mpc_push", "arm_teacher", "cached", "null"};
}

std::string default_controller(const std::string& task) {
  if (envs::is_hook_family(task)) return "reactive_hook";
  if (task == "pick_and_place") return "reactive_pick_and_place";
  if (envs::is_push_family(task)) return "reactive_push";
  if (task == "dense_arm") return "arm_teacher";
  return "null";
}

void check_compatible(const std::string& controller, const std::string& task) {
  const auto& names = controller_names();
  if (std::find(names.begin(), names.end(), controller) == names.end())
    throw ConfigError("unknown controller '" + controller + "'");
  bool ok = false;
  if (controller == "null")
    ok = true;
  else if (controller == "reactive_push" || controller == "mpc_push")
    ok = task == "push" || task == "slippery_push";
  else if (controller == "reactive_pick_and_place")
    ok = task == "pick_and_place";
  else if (controller == "reactive_hook")
    ok = envs::is_hook_family(task);
  else if (controller == "arm_teacher")
    ok = task == "dense_arm";
  else if (controller == "cached")
    ok = true;  // checked against the teacher
  if (!ok) throw ConfigError("controller '" + controller + "' cannot drive task '" + task + "'");
}

ExperimentConfig experiment_from(Config& config) {
  config.require_sections({"task", "method", "agent", "controller"});
  ExperimentConfig e;

  ConfigSection& task = config.section("task");
  e.task = envs::task_config_from(task);
  task.reject_unknown();

  ConfigSection& method = config.section("method");
  e.method = agent::parse_method(method.get_string("name", agent::to_string(e.method)));
  e.n_epochs = static_cast<int>(method.get_int("n_epochs", e.n_epochs));
  if (method.has("seeds")) {
    e.seeds.clear();
    for (long long s : method.get_ints("seeds", {})) {
      if (s < 0) throw ConfigError("[method] seeds must be non-negative");
      e.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  e.record_wall_clock = method.get_bool("record_wall_clock", e.record_wall_clock);
  e.checkpoint_every = static_cast<int>(method.get_int("checkpoint_every", e.checkpoint_every));
  method.reject_unknown();
  if (e.n_epochs < 0) throw ConfigError("[method] n_epochs must be non-negative");
  if (e.seeds.empty()) throw ConfigError("[method] seeds must not be empty");
  if (e.checkpoint_every < 1) throw ConfigError("[method] checkpoint_every must be positive");

  ConfigSection& agent_section = config.section("agent");
  e.agent = agent::agent_config_from(agent_section);
  agent_section.reject_unknown();
  if (std::isnan(e.agent.noise_scale) && envs::is_hook_family(e.task.name)) e.agent.noise_scale = 0.1;

  ConfigSection& controller = config.section("controller");
  e.controller = controller_from(controller);
  controller.reject_unknown();
  if (e.controller.name.empty()) e.controller.name = default_controller(e.task.name);

  // Validates the task parameters before any compute.
  const auto env = envs::make_env(e.task);
  check_compatible(e.controller.name, e.task.name);
  if (e.controller.name == "cached") {
    if (e.controller.teacher.empty() && e.controller.cache_file.empty())
      throw ConfigError("[controller] cached needs a teacher or a cache_file");
    if (e.controller.teacher == "cached") throw ConfigError("[controller] a cache cannot teach a cache");
    if (!e.controller.teacher.empty()) check_compatible(e.controller.teacher, e.task.name);
  } else if (!e.controller.teacher.empty()) {
    throw ConfigError("[controller] teacher only applies to the cached controller");
  }
  if (e.agent.history_length != 0 && e.method != agent::Method::rpl)
    throw ConfigError("[agent] history_length applies to rpl only");
  return e;
}

ExperimentConfig load_experiment(const std::string& path) {
  Config config = Config::load(path);
  return experiment_from(config);
}

BuiltController make_controller(const ControllerSpec& spec, const envs::TaskConfig& task) {
  check_compatible(spec.name, task.name);
  const auto env = envs::make_env(task);
  const envs::GoalEnv& world = unwrap(*env);
  BuiltController out;

  if (spec.name == "null") {
    out.controller = std::make_unique<controllers::NullController>(env->spec().action_dim);
  } else if (spec.name == "reactive_push") {
    controllers::ReactiveParams p;
    apply_overrides(p, spec);
    out.controller = std::make_unique<controllers::ReactivePush>(p);
  } else if (spec.name == "reactive_pick_and_place") {
    controllers::ReactiveParams p;
    apply_overrides(p, spec);
    out.controller = std::make_unique<controllers::ReactivePickAndPlace>(p);
  } else if (spec.name == "reactive_hook") {
    const auto* hook = dynamic_cast<const envs::HookWorld*>(&world);
    require(hook != nullptr, "reactive_hook: task is not a hook world");
    controllers::HookParams p = controllers::hook_params_for(*hook);
    apply_overrides(p.base, spec);
    out.controller = std::make_unique<controllers::ReactiveHook>(p);
  } else if (spec.name == "mpc_push") {
    controllers::MpcConfig cfg;
    cfg.expansions_per_step = spec.expansions;
    out.controller = std::make_unique<controllers::DiscreteMpcPush>(world.clone(), cfg);
  } else if (spec.name == "arm_teacher") {
    const auto* arm = dynamic_cast<const envs::DenseArmWorld*>(&world);
    require(arm != nullptr, "arm_teacher: task is not the arm world");
    out.controller = std::make_unique<controllers::ArmPushTeacher>(arm->config());
  } else if (spec.name == "cached") {
    if (!spec.cache_file.empty() && std::ifstream(spec.cache_file).good()) {
      controllers::ControllerCache cache = controllers::load_cache_file(spec.cache_file);
      if (cache.size() == 0) throw ConfigError("cache file '" + spec.cache_file + "' is empty");
      if (static_cast<int>(cache.actions.front().size()) != env->spec().action_dim ||
          static_cast<int>(cache.states.front().size()) != env->spec().state_dim)
        throw ConfigError("cache file '" + spec.cache_file + "' does not match task '" + task.name + "'");
      out.controller = std::make_unique<controllers::CachedController>(std::move(cache), spec.teacher.empty() ? "file" : spec.teacher);
    } else {
      if (spec.teacher.empty()) throw ConfigError("cache file '" + spec.cache_file + "' not found and no teacher given");
      ControllerSpec teacher_spec = spec;
      teacher_spec.name = spec.teacher;
      teacher_spec.teacher.clear();
      BuiltController teacher = make_controller(teacher_spec, task);
      auto teacher_env = envs::make_env(task);
      controllers::ControllerCache cache =
          controllers::compile_cache(*teacher.controller, *teacher_env, spec.capacity, spec.cache_seed);
      out.teacher_env_steps = static_cast<long>(teacher_env->step_calls()) + teacher.teacher_env_steps;
      if (!spec.cache_file.empty()) controllers::save_cache_file(cache, spec.cache_file);
      out.controller = std::make_unique<controllers::CachedController>(std::move(cache), spec.teacher);
    }
  }
  require(out.controller != nullptr, "make_controller: unhandled controller " + spec.name);
  return out;
}

}  // namespace rpl::harness
