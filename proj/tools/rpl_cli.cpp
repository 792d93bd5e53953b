#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <tuple>

#include "rpl/agent/rollout.hpp"
#include "rpl/agent/trainer.hpp"
#include "rpl/common/error.hpp"
#include "rpl/envs/tasks.hpp"
#include "rpl/harness/experiment.hpp"

namespace fs = std::filesystem;
using namespace rpl;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_train(const std::string& config_path, const long long* seed, const std::string& out, bool resume) {
  const std::string text = read_text(config_path);
  Config config = Config::parse(text);
  harness::ExperimentConfig cfg = harness::experiment_from(config);
  if (seed) {
    if (*seed < 0) throw ConfigError("--seed must be non-negative");
    cfg.seeds = {static_cast<std::uint64_t>(*seed)};
  }
  harness::RunOptions opt;
  opt.out_dir = out;
  opt.resume = resume;
  opt.config_text = text;
  opt.log = &std::cerr;
  const auto records = harness::run_experiment(cfg, opt);
  if (out.empty()) harness::write_csv(std::cout, records);
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& task, int episodes, long long seed) {
  if (episodes < 1) throw ConfigError("--episodes must be positive");
  if (seed < 0) throw ConfigError("--seed must be non-negative");
  const fs::path dir(checkpoint);
  Config config = Config::parse(read_text((dir / "config.ini").string()));
  harness::ExperimentConfig cfg = harness::experiment_from(config);
  if (task != cfg.task.name) {
    envs::TaskConfig fresh;
    fresh.name = task;
    fresh.seed = cfg.task.seed;
    cfg.task = fresh;
    if (cfg.controller.name != "cached" && cfg.controller.name != "null")
      cfg.controller.name = harness::default_controller(task);
    harness::check_compatible(cfg.controller.name, task);
  }
  auto env = envs::make_env(cfg.task);
  harness::BuiltController built = harness::make_controller(cfg.controller, cfg.task);
  const std::uint64_t stream = harness::run_stream_seed(cfg, static_cast<std::uint64_t>(seed));
  agent::EvalResult result;
  if (cfg.method == agent::Method::initial_only) {
    agent::PolicyView view{agent::Method::initial_only, nullptr, nullptr, built.controller.get()};
    result = agent::evaluate(*env, view, episodes, stream);
  } else {
    const controllers::Controller* base = cfg.method == agent::Method::scratch ? nullptr : built.controller.get();
    agent::Trainer trainer(cfg.method, *env, base, cfg.agent, stream);
    trainer.load(dir.string());
    result = trainer.evaluate(episodes, stream);
  }
  std::cout << "task " << cfg.task.name << " method " << agent::to_string(cfg.method) << " episodes " << episodes
            << " success_rate " << result.success_rate << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out) {
  harness::ExperimentConfig cfg = harness::load_experiment(config_path);
  harness::ControllerSpec teacher_spec = cfg.controller;
  if (teacher_spec.name == "cached") {
    if (teacher_spec.teacher.empty()) throw ConfigError("[controller] sweep-cache needs a teacher");
    teacher_spec.name = teacher_spec.teacher;
    teacher_spec.teacher.clear();
  }
  harness::BuiltController teacher = harness::make_controller(teacher_spec, cfg.task);
  auto env = envs::make_env(cfg.task);
  const auto rows = harness::cache_sweep(*teacher.controller, *env, cfg.controller.sweep_sizes,
                                         cfg.controller.sweep_trials, cfg.controller.sweep_episodes,
                                         derive_seed(cfg.controller.cache_seed, cfg.task.seed));
  if (out.empty()) {
    harness::write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream os(out);
    if (!os) throw ConfigError("cannot write '" + out + "'");
    harness::write_sweep_csv(os, rows);
  }
  return 0;
}

int cmd_plot_data(const std::string& runs, const std::string& out) {
  if (!fs::is_directory(runs)) throw ConfigError("'" + runs + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(runs)) {
    if (!entry.is_regular_file() || entry.path().filename() != "records.csv") continue;
    const std::string parent = entry.path().parent_path().filename().string();
    if (parent == "checkpoint" || parent == "checkpoint.tmp") continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no records.csv under '" + runs + "'");
  std::vector<harness::RunRecord> records;
  std::set<std::tuple<std::string, std::string, std::uint64_t, int>> seen;
  for (const fs::path& f : files)
    for (const auto& r : harness::read_csv_file(f.string()))
      if (seen.insert({r.method, r.task, r.seed, r.epoch}).second) records.push_back(r);
  const auto curve = harness::aggregate_groups(records);
  std::ofstream os(out);
  if (!os) throw ConfigError("cannot write '" + out + "'");
  harness::write_curve_csv(os, curve);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residual policy learning experiments"};
  app.require_subcommand(1);

  std::string config_path, out, checkpoint, task, runs;
  long long seed = 0;
  int episodes = 50;
  bool resume = false;

  auto* train = app.add_subcommand("train", "Run every seed of an experiment config");
  train->add_option("--config", config_path, "Experiment config")->required();
  auto* seed_opt = train->add_option("--seed", seed, "Run this seed only");
  train->add_option("--out", out, "Output directory (records.csv, per-seed checkpoints)");
  train->add_flag("--resume", resume, "Continue from checkpoints in --out");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  eval->add_option("--task", task, "Task name")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes")->required();
  eval->add_option("--seed", seed, "Evaluation seed");

  auto* sweep = app.add_subcommand("sweep-cache", "Success rate against cache size");
  sweep->add_option("--config", config_path, "Experiment config")->required();
  sweep->add_option("--out", out, "Output CSV (default stdout)");

  auto* plot = app.add_subcommand("plot-data", "Aggregate run records into mean/std curves");
  plot->add_option("--runs", runs, "Directory searched for records.csv")->required();
  plot->add_option("--out", out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(config_path, seed_opt->count() ? &seed : nullptr, out, resume);
    if (*eval) return cmd_eval(checkpoint, task, episodes, seed);
    if (*sweep) return cmd_sweep(config_path, out);
    if (*plot) return cmd_plot_data(runs, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
