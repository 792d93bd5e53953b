#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "rpl/agent/rollout.hpp"
#include "rpl/common/error.hpp"
#include "rpl/common/random.hpp"
#include "rpl/controllers/cache.hpp"
#include "rpl/harness/experiment.hpp"

namespace fs = std::filesystem;

namespace rpl::harness {

namespace {

std::string seed_dir(const RunOptions& o, std::uint64_t seed) {
  return (fs::path(o.out_dir) / ("seed_" + std::to_string(seed))).string();
}

// Checkpoint layout: trainer files, records.csv with every record so far and
// config.ini. Written to a scratch directory and renamed into place.
void write_checkpoint(const std::string& dir, const agent::Trainer* trainer, const std::vector<RunRecord>& records,
                      const RunOptions& o) {
  const fs::path target(dir);
  const fs::path tmp = target.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  if (trainer) trainer->save(tmp.string());
  {
    std::ofstream csv(tmp / "records.csv");
    write_csv(csv, records);
  }
  {
    std::ofstream cfg(tmp / "config.ini");
    cfg << o.config_text;
  }
  fs::remove_all(target);
  fs::rename(tmp, target);
}

void note(const RunOptions& o, const std::string& line) {
  if (o.log) *o.log << line << std::endl;
}

}  // namespace

std::uint64_t run_stream_seed(const ExperimentConfig& cfg, std::uint64_t seed) { return derive_seed(seed, cfg.task.seed); }

SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed, const RunOptions& options) {
  SeedRun run;
  if (cfg.n_epochs == 0) return run;

  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t stream = run_stream_seed(cfg, seed);
  BuiltController built = make_controller(cfg.controller, cfg.task);
  auto env = envs::make_env(cfg.task);
  const long offset = built.teacher_env_steps;
  const long steps_per_epoch = static_cast<long>(cfg.agent.cycles_per_epoch) * cfg.agent.rollout_batch_size *
                               env->spec().horizon;
  const std::string method = agent::to_string(cfg.method);
  const std::string ckpt = options.out_dir.empty() ? "" : (fs::path(seed_dir(options, seed)) / "checkpoint").string();

  std::unique_ptr<agent::Trainer> trainer;
  if (cfg.method != agent::Method::initial_only) {
    const controllers::Controller* base = cfg.method == agent::Method::scratch ? nullptr : built.controller.get();
    trainer = std::make_unique<agent::Trainer>(cfg.method, *env, base, cfg.agent, stream);
  }

  int first_epoch = 0;
  double wall_before = 0.0;
  if (options.resume && !ckpt.empty() && fs::exists(fs::path(ckpt) / "records.csv")) {
    run.records = read_csv_file((fs::path(ckpt) / "records.csv").string());
    if (trainer) trainer->load(ckpt);
    first_epoch = run.records.empty() ? 0 : run.records.back().epoch + 1;
    if (!run.records.empty()) wall_before = run.records.back().wall_seconds;
    for (const RunRecord& r : run.records)
      if (options.on_record) options.on_record(r);
    note(options, "seed " + std::to_string(seed) + ": resuming at epoch " + std::to_string(first_epoch));
  }

  for (int epoch = first_epoch; epoch < cfg.n_epochs; ++epoch) {
    RunRecord rec;
    rec.method = method;
    rec.task = cfg.task.name;
    rec.seed = seed;
    rec.epoch = epoch;
    std::vector<envs::Trajectory> trajectories;

    if (trainer) {
      if (epoch > 0) {
        int episodes = 0, successes = 0;
        double loss = 0.0;
        for (int c = 0; c < cfg.agent.cycles_per_epoch; ++c) {
          const agent::CycleStats stats = trainer->run_cycle();
          episodes += stats.episodes;
          successes += stats.successes;
          loss += stats.critic_loss_mean;
          if (options.on_cycle) options.on_cycle(stats);
          if (trainer->burn_in_stalled() && !run.burn_in_warning) {
            run.burn_in_warning = true;
            note(options, "warning: seed " + std::to_string(seed) + ": burn-in gate still shut after " +
                              std::to_string(trainer->gate().readings()) + " cycles");
          }
        }
        rec.train_success_rate = episodes ? static_cast<double>(successes) / episodes : 0.0;
        rec.critic_loss_mean = loss / cfg.agent.cycles_per_epoch;
      }
      agent::EvalResult eval = trainer->evaluate(cfg.agent.test_rollouts, stream, options.keep_trajectories);
      rec.eval_success_rate = eval.success_rate;
      trajectories = std::move(eval.trajectories);
      rec.env_steps = offset + trainer->env_steps();
      rec.actor_frozen = trainer->actor_frozen();
    } else {
      agent::PolicyView view{agent::Method::initial_only, nullptr, nullptr, built.controller.get()};
      agent::EvalResult eval = agent::evaluate(*env, view, cfg.agent.test_rollouts, stream, options.keep_trajectories);
      rec.eval_success_rate = eval.success_rate;
      trajectories = std::move(eval.trajectories);
      rec.env_steps = offset + epoch * steps_per_epoch;
      rec.actor_frozen = false;
    }
    if (cfg.record_wall_clock)
      rec.wall_seconds =
          wall_before + std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    run.records.push_back(rec);
    if (options.keep_trajectories) run.eval_trajectories.push_back(std::move(trajectories));
    if (options.on_record) options.on_record(rec);
    note(options, method + " " + cfg.task.name + " seed " + std::to_string(seed) + " epoch " + std::to_string(epoch) +
                      " steps " + std::to_string(rec.env_steps) + " eval " + std::to_string(rec.eval_success_rate));

    const bool last = epoch + 1 == cfg.n_epochs;
    if (!ckpt.empty() && (last || epoch % cfg.checkpoint_every == 0)) write_checkpoint(ckpt, trainer.get(), run.records, options);
  }
  return run;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  std::vector<RunRecord> all;
  for (std::uint64_t seed : cfg.seeds) {
    SeedRun run = run_seed(cfg, seed, options);
    all.insert(all.end(), run.records.begin(), run.records.end());
  }
  if (!options.out_dir.empty()) {
    fs::create_directories(options.out_dir);
    std::ofstream csv(fs::path(options.out_dir) / "records.csv");
    write_csv(csv, all);
  }
  return all;
}

std::vector<SweepRow> cache_sweep(controllers::Controller& teacher, const envs::GoalEnv& env,
                                  const std::vector<std::size_t>& sizes, int trials, int episodes, std::uint64_t seed) {
  require(!sizes.empty(), "cache_sweep: sizes must not be empty");
  require(trials >= 1 && episodes >= 1, "cache_sweep: trials and episodes must be positive");
  for (std::size_t s : sizes) require(s >= 1, "cache_sweep: cache size must be at least 1");
  std::vector<SweepRow> rows;
  for (std::size_t size : sizes) {
    std::vector<double> rates;
    for (int t = 0; t < trials; ++t) {
      auto teacher_copy = teacher.clone();
      auto work = env.clone();
      controllers::ControllerCache cache =
          controllers::compile_cache(*teacher_copy, *work, size, derive_seed(seed, static_cast<std::uint64_t>(t)));
      controllers::CachedController cached(std::move(cache), teacher.name());
      agent::PolicyView view{agent::Method::initial_only, nullptr, nullptr, &cached};
      // Evaluation seeds depend on the trial only, so sizes are compared on the same episodes.
      rates.push_back(agent::evaluate(*work, view, episodes, derive_seed(seed ^ 0x7377656570ULL, t)).success_rate);
    }
    SweepRow row;
    row.size = size;
    row.trials = trials;
    for (double r : rates) row.mean += r;
    row.mean /= trials;
    for (double r : rates) row.std += (r - row.mean) * (r - row.mean);
    row.std = std::sqrt(row.std / trials);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rpl::harness
