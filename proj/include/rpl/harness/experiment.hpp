#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "rpl/agent/config.hpp"
#include "rpl/agent/policy.hpp"
#include "rpl/agent/trainer.hpp"
#include "rpl/common/config.hpp"
#include "rpl/controllers/controller.hpp"
#include "rpl/envs/tasks.hpp"

namespace rpl::harness {

// [controller] section. An empty name selects the task's default controller.
struct ControllerSpec {
  std::string name;
  double gain_scale = std::numeric_limits<double>::quiet_NaN();
  double distance_threshold = std::numeric_limits<double>::quiet_NaN();
  double miscalibration_multiplier = std::numeric_limits<double>::quiet_NaN();
  int expansions = 10;  // mpc_push
  // cached: compile `teacher` into a nearest-neighbour table, or load one.
  std::string teacher;
  std::size_t capacity = 500;
  std::uint64_t cache_seed = 0;
  std::string cache_file;
  // sweep-cache
  std::vector<std::size_t> sweep_sizes = {1, 10, 100, 500};
  int sweep_trials = 25;
  int sweep_episodes = 10;
};

struct ExperimentConfig {
  envs::TaskConfig task;
  agent::Method method = agent::Method::rpl;
  ControllerSpec controller;
  agent::AgentConfig agent;
  int n_epochs = 10;  // evaluation points; epoch 0 evaluates the untrained policy
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  bool record_wall_clock = false;
  int checkpoint_every = 1;  // epochs between checkpoints when an output directory is set
};

// Reads [task], [method], [agent] and [controller]; any other section or
// unknown key is a ConfigError, as is an incompatible task/controller pair.
ExperimentConfig experiment_from(Config& config);
ExperimentConfig load_experiment(const std::string& path);

std::vector<std::string> controller_names();
std::string default_controller(const std::string& task);
// Throws ConfigError when `controller` cannot drive `task`.
void check_compatible(const std::string& controller, const std::string& task);

struct BuiltController {
  std::unique_ptr<controllers::Controller> controller;
  long teacher_env_steps = 0;  // environment steps spent compiling a cache
};

BuiltController make_controller(const ControllerSpec& spec, const envs::TaskConfig& task);

struct RunRecord {
  std::string method;
  std::string task;
  std::uint64_t seed = 0;
  int epoch = 0;
  long env_steps = 0;
  double eval_success_rate = 0.0;
  double train_success_rate = std::numeric_limits<double>::quiet_NaN();
  double critic_loss_mean = std::numeric_limits<double>::quiet_NaN();
  bool actor_frozen = false;
  double wall_seconds = 0.0;

  bool operator==(const RunRecord& o) const;
};

const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const RunRecord& r);
void write_csv(std::ostream& os, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_csv(std::istream& is);
std::vector<RunRecord> read_csv_file(const std::string& path);

struct RunOptions {
  std::string out_dir;       // empty: no files written
  bool resume = false;       // continue from out_dir/seed_<s>/checkpoint when present
  bool keep_trajectories = false;
  std::string config_text;   // written to each checkpoint as config.ini
  std::ostream* log = nullptr;
  std::function<void(const RunRecord&)> on_record;
  std::function<void(const agent::CycleStats&)> on_cycle;
};

struct SeedRun {
  std::vector<RunRecord> records;
  std::vector<std::vector<envs::Trajectory>> eval_trajectories;  // per epoch, if kept
  bool burn_in_warning = false;
};

// Seed used for this run's environment streams: the run seed mixed with the
// task seed.
std::uint64_t run_stream_seed(const ExperimentConfig& cfg, std::uint64_t seed);

SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed, const RunOptions& options = {});
// All configured seeds in order; writes out_dir/records.csv when set.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

struct CurvePoint {
  std::string method;
  std::string task;
  int epoch = 0;
  long env_steps = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over seeds
  int seeds = 0;
};

// Per-epoch mean and population std of eval_success_rate over seeds. All
// records must share one method and task, and every seed must report the
// same epochs; otherwise ContractError.
std::vector<CurvePoint> aggregate(const std::vector<RunRecord>& records);
// Splits by (method, task) and aggregates each group.
std::vector<CurvePoint> aggregate_groups(const std::vector<RunRecord>& records);
void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve);

struct SweepRow {
  std::size_t size = 0;
  double mean = 0.0;
  double std = 0.0;
  int trials = 0;
};

// For every size: `trials` caches compiled from the teacher with seeds
// derive_seed(seed, trial), each evaluated on `episodes` evaluation seeds.
std::vector<SweepRow> cache_sweep(controllers::Controller& teacher, const envs::GoalEnv& env,
                                  const std::vector<std::size_t>& sizes, int trials, int episodes, std::uint64_t seed);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace rpl::harness
