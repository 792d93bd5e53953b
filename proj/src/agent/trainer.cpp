#include "rpl/agent/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "rpl/common/error.hpp"
#include "rpl/common/random.hpp"

namespace rpl::agent {

namespace {

constexpr std::uint64_t kRolloutStream = 0x726f6c6c;
constexpr std::uint64_t kExploreStream = 0x6578706c;
constexpr std::uint64_t kSampleStream = 0x73616d70;
constexpr std::uint64_t kNetStream = 0x6e657473;

ActorKind kind_for(Method m) { return m == Method::rpl ? ActorKind::residual : ActorKind::squashed; }

}  // namespace

struct Trainer::Worker {
  std::unique_ptr<envs::GoalEnv> env;
  std::unique_ptr<controllers::Controller> base;
  Rng rng;
  std::uint64_t stream_seed = 0;
  std::uint64_t episodes = 0;
  ExploreCounts counts;
  std::vector<EpisodeResult> results;
};

Trainer::Trainer(Method method, const envs::GoalEnv& env, const controllers::Controller* base, AgentConfig config,
                 std::uint64_t seed)
    : method_(method),
      config_(std::move(config)),
      seed_(seed),
      spec_(env.spec()),
      env_(env.clone()),
      base_(base ? base->clone() : nullptr),
      buffer_(spec_.horizon, std::max<std::size_t>(config_.buffer_size, static_cast<std::size_t>(spec_.horizon))),
      gate_(config_.burn_in_beta),
      sample_rng_(derive_seed(seed, kSampleStream)) {
  config_.validate();
  if (method_ == Method::initial_only) throw ConfigError("Trainer: initial_only has nothing to train");
  if ((method_ == Method::rpl || method_ == Method::expert_explore) && !base_)
    throw ConfigError("Trainer: method " + to_string(method_) + " needs an initial controller");
  if (base_ && base_->action_dim() != spec_.action_dim)
    throw ConfigError("Trainer: controller action_dim does not match the task");
  if (method_ != Method::rpl && config_.history_length != 0)
    throw ConfigError("Trainer: history_length applies to rpl only");
  if (std::isnan(config_.gamma)) config_.gamma = spec_.gamma;
  if (std::isnan(config_.noise_scale)) config_.noise_scale = 0.2;
  if (!spec_.sparse_reward) config_.her_prob = 0.0;  // relabeling needs a goal-only reward

  params_.gamma = config_.gamma;
  params_.action_l2 = config_.action_l2;
  params_.l2_target = config_.action_l2_target;
  params_.critic_on_residual = config_.critic_on_residual;
  params_.clip_target = config_.clip_target && spec_.sparse_reward;
  params_.target_min = 0.0;
  params_.target_max = 1.0 / (1.0 - config_.gamma);

  ac_ = make_actor_critic(kind_for(method_), config_.history_length, spec_.state_dim, spec_.goal_dim,
                          spec_.action_dim, config_.hidden, derive_seed(seed, kNetStream), config_.actor_lr,
                          config_.critic_lr, config_.adam_beta1, config_.adam_beta2, config_.adam_epsilon);
  norms_ = Normalizers(spec_.state_dim, spec_.goal_dim, config_.clip_obs, config_.clip_norm, config_.norm_eps);
  explore_.params.random_action_prob = config_.random_action_prob;
  explore_.params.noise_scale = config_.noise_scale;
  explore_.epsilon = config_.explore_epsilon;
  explore_.alpha = config_.explore_alpha;

  for (int w = 0; w < config_.workers; ++w) {
    auto worker = std::make_unique<Worker>();
    worker->env = env.clone();
    worker->base = base_ ? base_->clone() : nullptr;
    worker->stream_seed = derive_seed(seed + static_cast<std::uint64_t>(w), kRolloutStream);
    worker->rng = Rng(derive_seed(seed + static_cast<std::uint64_t>(w), kExploreStream));
    workers_.push_back(std::move(worker));
  }
}

Trainer::~Trainer() = default;

bool Trainer::burn_in_stalled() const {
  return uses_gate() && !gate_.open() && gate_.readings() >= config_.burn_in_warn_cycles;
}

void Trainer::collect(std::vector<EpisodeResult>& out) {
  auto run = [this](Worker& w) {
    PolicyView view{method_, &ac_, &norms_, w.base.get()};
    w.results.clear();
    for (int k = 0; k < config_.rollout_batch_size; ++k)
      w.results.push_back(
          run_episode(*w.env, view, training_seed(w.stream_seed, w.episodes++), &explore_, &w.rng, false, &w.counts));
  };
  if (workers_.size() == 1) {
    run(*workers_[0]);
  } else {
    std::vector<std::thread> threads;
    for (auto& w : workers_) threads.emplace_back(run, std::ref(*w));
    for (auto& t : threads) t.join();
  }
  for (auto& w : workers_)
    for (auto& r : w->results) out.push_back(std::move(r));
}

void Trainer::absorb(std::vector<EpisodeResult>& episodes, CycleStats& stats) {
  const int horizon = spec_.horizon;
  for (EpisodeResult& r : episodes) {
    Mat states(spec_.state_dim, horizon + 1);
    Mat goals(spec_.goal_dim, 2 * horizon);
    for (int t = 0; t < horizon; ++t) {
      Transition& tr = r.episode[t];
      tr.episode_id = next_episode_id_;
      states.col(t) = tr.state;
      goals.col(2 * t) = tr.desired_goal;
      goals.col(2 * t + 1) = tr.achieved_goal_next;
    }
    states.col(horizon) = r.episode.back().next_state;
    ++next_episode_id_;
    buffer_.store_episode(std::move(r.episode));
    norms_.state.update(states);
    norms_.goal.update(goals);
    ++stats.episodes;
    stats.successes += r.success ? 1 : 0;
    stats.env_steps += horizon;
  }
}

CycleStats Trainer::run_cycle() {
  CycleStats stats;
  stats.actor_fingerprint_before = ac_.actor.fingerprint();
  std::vector<EpisodeResult> episodes;
  collect(episodes);
  absorb(episodes, stats);
  env_steps_ += stats.env_steps;

  stats.actor_updated = !actor_frozen();
  const envs::GoalEnv& env = *env_;
  const RewardFn reward = [&env](const Vec& a, const Vec& d) { return env.compute_reward(a, d); };
  double loss_sum = 0.0;
  for (int b = 0; b < config_.batches_per_cycle; ++b) {
    const auto samples = her_sample(buffer_, config_.batch_size, config_.her_prob, config_.her_strategy, reward,
                                    sample_rng_);
    loss_sum += ddpg_update(ac_, make_batch(samples), params_, stats.actor_updated).critic_loss;
  }
  if (config_.batches_per_cycle > 0) {
    update_targets(ac_, config_.polyak);
    stats.critic_loss_mean = loss_sum / config_.batches_per_cycle;
    if (uses_gate()) gate_.record(stats.critic_loss_mean);
  }
  stats.gate_open_after = !actor_frozen();
  stats.actor_fingerprint_after = ac_.actor.fingerprint();
  counts_ = ExploreCounts{};
  for (const auto& w : workers_) {
    counts_.random += w->counts.random;
    counts_.noisy += w->counts.noisy;
    counts_.expert += w->counts.expert;
    counts_.ee_random += w->counts.ee_random;
    counts_.learned += w->counts.learned;
  }
  ++cycles_;
  return stats;
}

TrainBatch Trainer::make_batch(const std::vector<SampledTransition>& samples) {
  const int n = static_cast<int>(samples.size());
  const int S = spec_.state_dim, G = spec_.goal_dim, A = spec_.action_dim;
  const bool history = ac_.history_length == 1;
  const bool residual = ac_.kind == ActorKind::residual;
  Mat s(S, n), s_prev(S, history ? n : 0), s_next(S, n), g(G, n);
  TrainBatch b;
  b.actions.resize(A, n);
  b.rewards.resize(n);
  if (residual) {
    b.base.resize(A, n);
    b.base_next.resize(A, n);
  }
  for (int j = 0; j < n; ++j) {
    const SampledTransition& st = samples[j];
    const Transition& tr = *st.transition;
    s.col(j) = tr.state;
    if (history) s_prev.col(j) = tr.prev_state;
    s_next.col(j) = tr.next_state;
    g.col(j) = st.goal;
    b.actions.col(j) = tr.action;
    b.rewards(j) = st.reward;
    if (residual) {
      if (!st.relabeled && tr.base_action.size() == A && tr.base_action_next.size() == A) {
        b.base.col(j) = tr.base_action;
        b.base_next.col(j) = tr.base_action_next;
      } else {
        b.base.col(j) = envs::clip_action(base_->act(Observation{tr.state, tr.achieved_goal, st.goal, tr.step_index}));
        b.base_next.col(j) = envs::clip_action(
            base_->act(Observation{tr.next_state, tr.achieved_goal_next, st.goal, tr.step_index + 1}));
      }
    }
  }
  if (residual && params_.critic_on_residual) b.actions -= b.base;
  const Mat ns = norms_.state.normalize_batch(s);
  const Mat nn = norms_.state.normalize_batch(s_next);
  const Mat ng = norms_.goal.normalize_batch(g);
  b.actor_in.resize(S + G, n);
  b.actor_in << ns, ng;
  b.next_actor_in.resize(S + G, n);
  b.next_actor_in << nn, ng;
  if (history) {
    const Mat np = norms_.state.normalize_batch(s_prev);
    b.actor_in_prev.resize(S + G, n);
    b.actor_in_prev << np, ng;
    b.next_actor_in_prev = b.actor_in;
    b.critic_obs.resize(2 * S + G, n);
    b.critic_obs << np, ns, ng;
    b.next_critic_obs.resize(2 * S + G, n);
    b.next_critic_obs << ns, nn, ng;
  } else {
    b.critic_obs = b.actor_in;
    b.next_critic_obs = b.next_actor_in;
  }
  return b;
}

EvalResult Trainer::evaluate(int n, std::uint64_t eval_seed, bool keep) {
  PolicyView view{method_, &ac_, &norms_, base_.get()};
  return agent::evaluate(*env_, view, n, eval_seed, keep);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

namespace fs = std::filesystem;

void write_raw(std::ostream& os, const double* data, std::size_t n) {
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_raw(std::istream& is, double* data, std::size_t n) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw ConfigError("checkpoint: truncated binary file");
}

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("checkpoint: truncated binary file");
  return v;
}

void write_vec(std::ostream& os, const Vec& v) {
  write_pod<std::int64_t>(os, v.size());
  write_raw(os, v.data(), v.size());
}

Vec read_vec(std::istream& is) {
  const auto n = read_pod<std::int64_t>(is);
  if (n < 0 || n > (1 << 24)) throw ConfigError("checkpoint: corrupt vector length");
  Vec v(n);
  read_raw(is, v.data(), n);
  return v;
}

void write_adam(std::ostream& os, const net::AdamState& a) {
  write_pod<std::uint64_t>(os, a.step_count);
  for (std::size_t l = 0; l < a.first_weights.size(); ++l) {
    write_raw(os, a.first_weights[l].data(), a.first_weights[l].size());
    write_raw(os, a.second_weights[l].data(), a.second_weights[l].size());
    write_raw(os, a.first_biases[l].data(), a.first_biases[l].size());
    write_raw(os, a.second_biases[l].data(), a.second_biases[l].size());
  }
}

void read_adam(std::istream& is, net::AdamState& a) {
  a.step_count = read_pod<std::uint64_t>(is);
  for (std::size_t l = 0; l < a.first_weights.size(); ++l) {
    read_raw(is, a.first_weights[l].data(), a.first_weights[l].size());
    read_raw(is, a.second_weights[l].data(), a.second_weights[l].size());
    read_raw(is, a.first_biases[l].data(), a.first_biases[l].size());
    read_raw(is, a.second_biases[l].data(), a.second_biases[l].size());
  }
}

std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream os(p, binary ? std::ios::binary : std::ios::out);
  if (!os) throw ConfigError("cannot write " + p.string());
  return os;
}

std::ifstream open_in(const fs::path& p, bool binary = false) {
  std::ifstream is(p, binary ? std::ios::binary : std::ios::in);
  if (!is) throw ConfigError("cannot read " + p.string());
  return is;
}

net::Mlp load_matching(const fs::path& p, const net::Mlp& like) {
  net::Mlp m = net::load_file(p.string());
  if (!m.same_architecture(like)) throw ConfigError(p.string() + ": network shape does not match the config");
  return m;
}

}  // namespace

void Trainer::save(const std::string& dir) const {
  const fs::path d(dir);
  fs::create_directories(d);
  net::save_file(ac_.actor, (d / "actor.net").string());
  net::save_file(ac_.critic, (d / "critic.net").string());
  net::save_file(ac_.actor_target, (d / "actor_target.net").string());
  net::save_file(ac_.critic_target, (d / "critic_target.net").string());
  {
    auto os = open_out(d / "state_norm.txt");
    norms_.state.save(os);
  }
  {
    auto os = open_out(d / "goal_norm.txt");
    norms_.goal.save(os);
  }
  {
    auto os = open_out(d / "trainer_state.txt");
    os << "RPLSTATE v1\n";
    os << "method " << to_string(method_) << '\n';
    os << "cycles " << cycles_ << "\nenv_steps " << env_steps_ << "\nnext_episode_id " << next_episode_id_ << '\n';
    os << "gate " << gate_.open() << ' ' << gate_.readings() << ' ' << gate_.opened_at() << '\n';
    os << "sample_rng " << sample_rng_ << '\n';
    os << "workers " << workers_.size() << '\n';
    for (const auto& w : workers_) {
      os << "worker " << w->episodes << ' ' << w->counts.random << ' ' << w->counts.noisy << ' ' << w->counts.expert
         << ' ' << w->counts.ee_random << ' ' << w->counts.learned << '\n';
      os << w->rng << '\n';
    }
    if (!os) throw ConfigError("failed writing trainer_state.txt");
  }
  {
    auto os = open_out(d / "optimizer.bin", true);
    write_adam(os, ac_.actor_opt);
    write_adam(os, ac_.critic_opt);
  }
  {
    auto os = open_out(d / "replay.bin", true);
    write_pod<std::uint64_t>(os, buffer_.episodes_stored());
    write_pod<std::uint64_t>(os, buffer_.num_episodes());
    for (std::size_t e = 0; e < buffer_.num_episodes(); ++e)
      for (const Transition& tr : buffer_.episode(e)) {
        for (const Vec* v : {&tr.state, &tr.prev_state, &tr.action, &tr.next_state, &tr.achieved_goal,
                             &tr.achieved_goal_next, &tr.desired_goal, &tr.base_action, &tr.base_action_next})
          write_vec(os, *v);
        write_pod<double>(os, tr.reward);
        write_pod<std::uint64_t>(os, tr.episode_id);
        write_pod<std::int32_t>(os, tr.step_index);
      }
    if (!os) throw ConfigError("failed writing replay.bin");
  }
}

void Trainer::load(const std::string& dir) {
  const fs::path d(dir);
  ac_.actor = load_matching(d / "actor.net", ac_.actor);
  ac_.critic = load_matching(d / "critic.net", ac_.critic);
  ac_.actor_target = load_matching(d / "actor_target.net", ac_.actor_target);
  ac_.critic_target = load_matching(d / "critic_target.net", ac_.critic_target);
  {
    auto is = open_in(d / "state_norm.txt");
    norms_.state = Normalizer::load(is, config_.clip_obs, config_.clip_norm, config_.norm_eps);
  }
  {
    auto is = open_in(d / "goal_norm.txt");
    norms_.goal = Normalizer::load(is, config_.clip_obs, config_.clip_norm, config_.norm_eps);
  }
  if (norms_.state.dim() != spec_.state_dim || norms_.goal.dim() != spec_.goal_dim)
    throw ConfigError("checkpoint: normalizer dimensions do not match the task");
  {
    auto is = open_in(d / "trainer_state.txt");
    std::string magic, version, key, method;
    is >> magic >> version;
    if (magic != "RPLSTATE" || version != "v1") throw ConfigError("checkpoint: missing RPLSTATE v1 header");
    is >> key >> method;
    if (method != to_string(method_)) throw ConfigError("checkpoint: trained with method " + method);
    bool open = false;
    long readings = 0, opened_at = -1;
    std::size_t nworkers = 0;
    is >> key >> cycles_ >> key >> env_steps_ >> key >> next_episode_id_;
    is >> key >> open >> readings >> opened_at;
    gate_.restore(open, readings, opened_at);
    is >> key >> sample_rng_;
    is >> key >> nworkers;
    if (!is || nworkers != workers_.size()) throw ConfigError("checkpoint: worker count does not match the config");
    for (auto& w : workers_) {
      is >> key >> w->episodes >> w->counts.random >> w->counts.noisy >> w->counts.expert >> w->counts.ee_random >>
          w->counts.learned;
      is >> w->rng;
    }
    if (!is) throw ConfigError("checkpoint: truncated trainer_state.txt");
  }
  {
    auto is = open_in(d / "optimizer.bin", true);
    read_adam(is, ac_.actor_opt);
    read_adam(is, ac_.critic_opt);
  }
  {
    auto is = open_in(d / "replay.bin", true);
    const auto stored = read_pod<std::uint64_t>(is);
    const auto count = read_pod<std::uint64_t>(is);
    buffer_ = ReplayBuffer(spec_.horizon, buffer_.capacity());
    for (std::uint64_t e = 0; e < count; ++e) {
      Episode ep(spec_.horizon);
      for (Transition& tr : ep) {
        for (Vec* v : {&tr.state, &tr.prev_state, &tr.action, &tr.next_state, &tr.achieved_goal,
                       &tr.achieved_goal_next, &tr.desired_goal, &tr.base_action, &tr.base_action_next})
          *v = read_vec(is);
        tr.reward = read_pod<double>(is);
        tr.episode_id = read_pod<std::uint64_t>(is);
        tr.step_index = read_pod<std::int32_t>(is);
      }
      buffer_.store_episode(std::move(ep));
    }
    buffer_.set_episodes_stored(stored);
  }
}

}  // namespace rpl::agent
