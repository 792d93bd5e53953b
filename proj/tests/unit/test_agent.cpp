#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "common/oracles.hpp"
#include "generators.hpp"
#include "rpl/agent/config.hpp"
#include "rpl/agent/ddpg.hpp"
#include "rpl/agent/normalizer.hpp"
#include "rpl/agent/policy.hpp"
#include "rpl/agent/replay.hpp"
#include "rpl/agent/rollout.hpp"
#include "rpl/agent/trainer.hpp"
#include "rpl/common/error.hpp"
#include "rpl/controllers/reactive.hpp"
#include "rpl/envs/tasks.hpp"

using namespace rpl;
using namespace rpl::agent;

namespace {

std::unique_ptr<envs::GoalEnv> task(const std::string& name) {
  envs::TaskConfig c;
  c.name = name;
  return envs::make_env(c);
}

// Base controller returning a fixed action.
class ConstController : public controllers::Controller {
 public:
  explicit ConstController(Vec a) : a_(std::move(a)) {}
  std::string name() const override { return "const"; }
  int action_dim() const override { return static_cast<int>(a_.size()); }
  Vec act(const Observation&) override { return a_; }
  std::unique_ptr<Controller> clone() const override { return std::make_unique<ConstController>(*this); }

 private:
  Vec a_;
};

AgentConfig small_config() {
  AgentConfig c;
  c.hidden = {16, 16};
  c.batch_size = 16;
  c.batches_per_cycle = 3;
  c.rollout_batch_size = 1;
  c.test_rollouts = 2;
  return c;
}

Vec vec4(double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return v;
}

RewardFn sparse_reward(double radius = 0.05) {
  return [radius](const Vec& a, const Vec& d) { return envs::sparse_goal_reward(a, d, radius); };
}

}  // namespace

TEST_CASE("normalizer matches a two-pass mean and variance") {
  Rng r(3);
  Normalizer n(4);
  Mat all(4, 0);
  for (int chunk = 0; chunk < 7; ++chunk) {
    const Mat x = testgen::mat(r, 4, 1 + static_cast<int>(r.index(30)), -3, 5);
    n.update(x);
    Mat grown(4, all.cols() + x.cols());
    grown << all, x;
    all = grown;
  }
  for (int i = 0; i < 4; ++i) {
    double mean = 0;
    for (Eigen::Index j = 0; j < all.cols(); ++j) mean += all(i, j);
    mean /= all.cols();
    double var = 0;
    for (Eigen::Index j = 0; j < all.cols(); ++j) var += (all(i, j) - mean) * (all(i, j) - mean);
    var /= all.cols();
    CHECK(n.mean()(i) == doctest::Approx(mean).epsilon(1e-12));
    CHECK(n.var()(i) == doctest::Approx(var).epsilon(1e-10));
  }
  CHECK(n.count() == all.cols());
}

TEST_CASE("normalizer clips raw inputs and outputs") {
  Normalizer n(1);
  Mat x(1, 2);
  x << 1000.0, -1000.0;
  n.update(x);
  CHECK(n.mean()(0) == 0.0);
  CHECK(n.var()(0) == doctest::Approx(200.0 * 200.0));
  Normalizer m(2);
  Rng r(1);
  m.update(testgen::mat(r, 2, 50, -0.1, 0.1));
  Vec far(2);
  far << 1e6, -1e6;
  const Vec z = m.normalize(far);
  CHECK(z(0) == 5.0);
  CHECK(z(1) == -5.0);
  CHECK(m.normalize_batch(Mat(far)).col(0) == z);
}

TEST_CASE("normalizer round trips through text") {
  Rng r(2);
  Normalizer n(3);
  n.update(testgen::mat(r, 3, 20));
  std::stringstream ss;
  n.save(ss);
  CHECK(Normalizer::load(ss) == n);
}

TEST_CASE("replay buffer evicts whole episodes oldest first") {
  Rng r(4);
  ReplayBuffer buf(5, 10);
  for (std::uint64_t e = 0; e < 3; ++e) buf.store_episode(oracle::random_episode(r, 5, 3, 2, 2, e, sparse_reward()));
  CHECK(buf.num_episodes() == 2);
  CHECK(buf.episodes_stored() == 3);
  CHECK(buf.episode(0).front().episode_id == 1);
  const auto batch = her_sample(buf, 2000, 0.0, HerStrategy::future, sparse_reward(), r);
  for (const auto& s : batch) CHECK(s.transition->episode_id != 0);
  Episode ragged = oracle::random_episode(r, 4, 3, 2, 2, 9, sparse_reward());
  CHECK_THROWS_AS(buf.store_episode(ragged), ContractError);
}

TEST_CASE("replay sampling covers every stored transition") {
  Rng r(5);
  ReplayBuffer buf(50);
  buf.store_episode(oracle::random_episode(r, 50, 3, 2, 2, 0, sparse_reward()));
  std::vector<int> seen(50, 0);
  for (const auto& s : her_sample(buf, 10000, 0.0, HerStrategy::future, sparse_reward(), r)) ++seen[s.step];
  CHECK(std::count(seen.begin(), seen.end(), 0) == 0);
  ReplayBuffer empty(50);
  CHECK_THROWS_AS(her_sample(empty, 1, 0.8, HerStrategy::future, sparse_reward(), r), ContractError);
}

TEST_CASE("hindsight relabeling agrees with brute force") {
  Rng r(6);
  const RewardFn reward = sparse_reward();
  for (HerStrategy strategy : {HerStrategy::future, HerStrategy::final}) {
    ReplayBuffer buf(20);
    for (std::uint64_t e = 0; e < 6; ++e) buf.store_episode(oracle::random_episode(r, 20, 3, 3, 2, e, reward));
    oracle::HerAudit audit;
    oracle::audit_her(buf, her_sample(buf, 20000, 0.8, strategy, reward, r), reward, strategy, audit);
    CHECK(audit.bad_goal == 0);
    CHECK(audit.bad_reward == 0);
    CHECK(oracle::within_se(audit.relabeled, audit.samples, 0.8));
  }
}

TEST_CASE("hindsight relabeling at the last step uses its own achieved goal") {
  Rng r(7);
  ReplayBuffer buf(8);
  buf.store_episode(oracle::random_episode(r, 8, 3, 3, 2, 0, sparse_reward()));
  for (const auto& s : her_sample(buf, 500, 1.0, HerStrategy::future, sparse_reward(), r)) {
    REQUIRE(s.relabeled);
    if (s.step == 7) {
      CHECK(s.goal == s.transition->achieved_goal_next);
      CHECK(s.reward == 1.0);
    }
  }
  for (const auto& s : her_sample(buf, 200, 0.0, HerStrategy::future, sparse_reward(), r)) {
    CHECK(s.reward == s.transition->reward);
    CHECK(s.goal == s.transition->desired_goal);
  }
}

TEST_CASE("compose action adds and clips") {
  CHECK(compose_action(vec4(0.9, 0, 0, 0), vec4(0.5, 0, 0, 0)) == vec4(1.0, 0, 0, 0));
  CHECK(compose_action(Vec::Zero(4), vec4(0.5, -0.3, 0, 0)) == vec4(0.5, -0.3, 0, 0));
  const Vec neg_zero = vec4(-0.0, 0.2, 0, 0);
  const Vec out = compose_action(neg_zero, Vec::Zero(4));
  CHECK(std::signbit(out(0)));
  CHECK_THROWS_AS(compose_action(Vec::Zero(3), Vec::Zero(4)), ContractError);
}

TEST_CASE("fresh residual policy reproduces its base controller") {
  auto env = task("push");
  controllers::ReactivePush base;
  const ActorCritic ac = make_actor_critic(ActorKind::residual, 0, env->spec().state_dim, env->spec().goal_dim, 4,
                                           {16, 16}, 1);
  Normalizers norms(env->spec().state_dim, env->spec().goal_dim);
  ResidualPolicy policy{&base, &ac.actor, &norms, 0};
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Observation obs = env->reset(s);
    CHECK(residual_act(policy, obs, nullptr) == controllers::ReactivePush().act(obs));
  }
}

TEST_CASE("history residual averages the two observations") {
  auto env = task("push");
  const int S = env->spec().state_dim, G = env->spec().goal_dim;
  net::Mlp f = net::Mlp::with_hidden(S + G, 4, {8});
  net::init_he_uniform(f, 3);
  Normalizers norms(S, G);
  ConstController zero(Vec::Zero(4));
  const Observation o1 = env->reset(1);
  const Observation o2 = env->step(vec4(1, 0, 0, 0)).observation;
  ResidualPolicy h1{&zero, &f, &norms, 1};
  const Vec expect = 0.5 * (f.forward(norms.input(o1.state, o2.desired_goal)) + f.forward(norms.input(o2.state, o2.desired_goal)));
  CHECK((residual_output(h1, o2, &o1) - expect).norm() < 1e-15);
  CHECK(residual_output(h1, o1, &o1) == f.forward(norms.input(o1.state, o1.desired_goal)));
  CHECK_THROWS_AS(residual_output(h1, o2, nullptr), ContractError);
  ResidualPolicy h0{&zero, &f, &norms, 0};
  CHECK_THROWS_AS(residual_output(h0, o2, &o1), ContractError);
}

TEST_CASE("explore_act branch statistics") {
  Rng r(8);
  const Vec a = vec4(0.2, -0.4, 0.9, 0.0);
  CHECK(explore_act(a, ExploreParams{0.0, 0.0}, r) == a);

  std::vector<double> draws;
  for (int i = 0; i < 100000; ++i) draws.push_back(explore_act(a, ExploreParams{1.0, 0.2}, r)(1));
  CHECK(oracle::ks_uniform(draws, -1.0, 1.0) < 1.628 / std::sqrt(100000.0));

  long random = 0;
  for (int i = 0; i < 100000; ++i) {
    bool branch = false;
    const Vec out = explore_act(a, ExploreParams{}, r, &branch);
    random += branch ? 1 : 0;
    CHECK(out.cwiseAbs().maxCoeff() <= 1.0);
  }
  CHECK(oracle::within_se(random, 100000, 0.3));
}

TEST_CASE("expert explore branch frequencies") {
  auto env = task("push");
  const int S = env->spec().state_dim, G = env->spec().goal_dim;
  net::Mlp actor = net::Mlp::with_hidden(S + G, 4, {8});
  net::init_he_uniform(actor, 2);
  Normalizers norms(S, G);
  ConstController expert(vec4(0.5, 0.5, 0.5, 0.5));
  const Observation obs = env->reset(0);
  Rng r(9);
  long counts[3] = {0, 0, 0};
  for (int i = 0; i < 100000; ++i) {
    ExpertExploreBranch b;
    const Vec out = expert_explore_act(actor, norms, expert, obs, 0.6, 0.8, r, &b);
    ++counts[static_cast<int>(b)];
    if (b == ExpertExploreBranch::expert) CHECK(out == vec4(0.5, 0.5, 0.5, 0.5));
    if (b == ExpertExploreBranch::learned) CHECK(out == squashed_act(actor, norms, obs));
  }
  CHECK(oracle::within_se(counts[0], 100000, 0.48));
  CHECK(oracle::within_se(counts[1], 100000, 0.12));
  CHECK(oracle::within_se(counts[2], 100000, 0.40));

  for (int i = 0; i < 100; ++i) {
    ExpertExploreBranch b;
    expert_explore_act(actor, norms, expert, obs, 0.0, 0.8, r, &b);
    CHECK(b == ExpertExploreBranch::learned);
    expert_explore_act(actor, norms, expert, obs, 1.0, 1.0, r, &b);
    CHECK(b == ExpertExploreBranch::expert);
  }
}

TEST_CASE("critic targets: gamma zero and unit rewards") {
  Rng r(10);
  ActorCritic ac = oracle::random_actor_critic(ActorKind::residual, 0, 5, 3, 4, {16, 16}, 4);
  TrainBatch b = oracle::random_batch(r, 5, 3, 4, 8, 0);
  DdpgParams p;
  p.gamma = 0.0;
  CHECK(critic_targets(ac, b, p) == b.rewards);

  for (int l = 0; l < ac.critic_target.num_layers(); ++l) {
    ac.critic_target.weight(l).setZero();
    ac.critic_target.bias(l).setZero();
  }
  b.rewards.setOnes();
  p.gamma = 0.98;
  CHECK(critic_targets(ac, b, p) == Vec::Ones(8));
  p.target_max = 0.5;
  CHECK(critic_targets(ac, b, p) == Vec::Constant(8, 0.5));
}

TEST_CASE("actor and critic gradients match finite differences") {
  Rng r(11);
  for (ActorKind kind : {ActorKind::residual, ActorKind::squashed}) {
    for (int history : {0, 1}) {
      if (kind == ActorKind::squashed && history == 1) continue;
      for (bool residual_critic : {false, true}) {
        for (L2Target l2 : {L2Target::composed, L2Target::residual}) {
          const ActorCritic ac = oracle::random_actor_critic(kind, history, 5, 3, 4, {12, 12}, r.bits());
          const TrainBatch b = oracle::random_batch(r, 5, 3, 4, 8, history);
          DdpgParams p;
          p.critic_on_residual = residual_critic;
          p.l2_target = l2;
          const auto actor = oracle::check_actor_gradient(ac, b, p);
          CHECK(actor.max_rel_error < 1e-4);
          CHECK(actor.checked > 10 * actor.skipped);
          const auto critic = oracle::check_critic_gradient(ac.critic, b, critic_targets(ac, b, p));
          CHECK(critic.max_rel_error < 1e-4);
          const auto qa = oracle::check_critic_action_gradient(ac.critic, b);
          CHECK(qa.max_rel_error < 1e-4);
        }
      }
    }
  }
}

TEST_CASE("residual critic isolates the actor gradient from the base action") {
  Rng r(12);
  const ActorCritic ac = oracle::random_actor_critic(ActorKind::residual, 0, 5, 3, 4, {12, 12}, 9);
  TrainBatch b = oracle::random_batch(r, 5, 3, 4, 8, 0);
  DdpgParams p;
  p.critic_on_residual = true;
  p.l2_target = L2Target::residual;
  const net::GradientTape t1 = actor_loss_grad(ac, b, p).tape;
  b.base = 0.5 * b.base;
  const net::GradientTape t2 = actor_loss_grad(ac, b, p).tape;
  for (int l = 0; l < ac.actor.num_layers(); ++l) {
    CHECK(t1.weights[l] == t2.weights[l]);
    CHECK(t1.biases[l] == t2.biases[l]);
  }
  // With the composed critic the same change moves the critic's action input.
  p.critic_on_residual = false;
  const net::GradientTape t3 = actor_loss_grad(ac, b, p).tape;
  b.base = 2.0 * b.base;
  const net::GradientTape t4 = actor_loss_grad(ac, b, p).tape;
  CHECK(t3.weights.back() != t4.weights.back());
}

TEST_CASE("ddpg update without the actor leaves it bit-identical") {
  Rng r(13);
  ActorCritic ac = oracle::random_actor_critic(ActorKind::residual, 0, 5, 3, 4, {12, 12}, 5);
  const TrainBatch b = oracle::random_batch(r, 5, 3, 4, 8, 0);
  const auto actor_fp = ac.actor.fingerprint(), critic_fp = ac.critic.fingerprint();
  ddpg_update(ac, b, DdpgParams{}, false);
  CHECK(ac.actor.fingerprint() == actor_fp);
  CHECK(ac.critic.fingerprint() != critic_fp);
  ddpg_update(ac, b, DdpgParams{}, true);
  CHECK(ac.actor.fingerprint() != actor_fp);
  TrainBatch bad = b;
  bad.rewards(0) = std::nan("");
  DdpgParams unclipped;
  unclipped.clip_target = false;
  CHECK_THROWS_AS(ddpg_update(ac, bad, unclipped, true), NumericError);
}

TEST_CASE("burn-in gate latches") {
  CHECK(burn_in_gate({0.5}, 1.0));
  BurnInGate g(1.0);
  const std::vector<double> losses = {5, 3, 2, 0.9, 4};
  std::vector<bool> open;
  for (double l : losses) {
    g.record(l);
    open.push_back(g.open());
  }
  CHECK(open == std::vector<bool>{false, false, false, true, true});
  CHECK(g.opened_at() == 4);
  CHECK_FALSE(burn_in_gate({1e-3, 1e-9, 1.0}, 0.0));
  CHECK_FALSE(burn_in_gate({1.0}, 1.0));
}

TEST_CASE("trainer keeps the actor frozen while the gate is shut") {
  auto env = task("push");
  controllers::ReactivePush base;
  AgentConfig c = small_config();
  c.burn_in_beta = 0.0;
  c.burn_in_warn_cycles = 3;
  Trainer t(Method::rpl, *env, &base, c, 1);
  const auto critic_fp = t.actor_critic().critic.fingerprint();
  for (int i = 0; i < 3; ++i) {
    const CycleStats s = t.run_cycle();
    CHECK_FALSE(s.actor_updated);
    CHECK(s.actor_fingerprint_before == s.actor_fingerprint_after);
  }
  CHECK(t.actor_critic().critic.fingerprint() != critic_fp);
  CHECK(t.burn_in_stalled());

  c.burn_in_beta = 1e9;
  Trainer open(Method::rpl, *env, &base, c, 1);
  const CycleStats first = open.run_cycle();
  CHECK_FALSE(first.actor_updated);
  CHECK(first.gate_open_after);
  const CycleStats second = open.run_cycle();
  CHECK(second.actor_updated);
  CHECK(second.actor_fingerprint_before != second.actor_fingerprint_after);
}

TEST_CASE("fresh rpl trainer evaluates exactly like its base controller") {
  auto env = task("slippery_push");
  controllers::ReactivePush base;
  Trainer t(Method::rpl, *env, &base, small_config(), 2);
  const EvalResult rpl = t.evaluate(5, 77, true);
  controllers::ReactivePush fresh;
  PolicyView view{Method::initial_only, nullptr, nullptr, &fresh};
  auto env2 = task("slippery_push");
  const EvalResult ref = evaluate(*env2, view, 5, 77, true);
  CHECK(rpl.success_rate == ref.success_rate);
  CHECK(rpl.trajectories == ref.trajectories);
}

TEST_CASE("training is a pure function of the seed and survives a checkpoint") {
  auto env = task("push");
  controllers::ReactivePush base;
  for (Method m : {Method::rpl, Method::scratch, Method::expert_explore}) {
    Trainer a(m, *env, &base, small_config(), 3);
    Trainer b(m, *env, &base, small_config(), 3);
    for (int i = 0; i < 2; ++i) {
      a.run_cycle();
      b.run_cycle();
    }
    CHECK(a.actor_critic().actor == b.actor_critic().actor);
    CHECK(a.actor_critic().critic == b.actor_critic().critic);

    const auto dir = std::filesystem::temp_directory_path() / ("rpl_ckpt_" + to_string(m));
    std::filesystem::remove_all(dir);
    a.save(dir.string());
    Trainer c(m, *env, &base, small_config(), 3);
    c.load(dir.string());
    CHECK(c.normalizers() == a.normalizers());
    a.run_cycle();
    c.run_cycle();
    CHECK(c.actor_critic().actor == a.actor_critic().actor);
    CHECK(c.actor_critic().critic_target == a.actor_critic().critic_target);
    CHECK(c.env_steps() == a.env_steps());
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("expert explore trainer mixes its branches") {
  auto env = task("push");
  controllers::ReactivePush base;
  AgentConfig c = small_config();
  c.batches_per_cycle = 0;
  c.rollout_batch_size = 20;
  Trainer t(Method::expert_explore, *env, &base, c, 4);
  t.run_cycle();
  const ExploreCounts& n = t.explore_counts();
  const long total = n.expert + n.ee_random + n.learned;
  CHECK(total == 20 * env->spec().horizon);
  CHECK(oracle::within_se(n.expert, total, 0.48, 4.0));
  CHECK(oracle::within_se(n.learned, total, 0.40, 4.0));
}

TEST_CASE("trainer rejects inconsistent settings") {
  auto env = task("push");
  controllers::ReactivePush base;
  CHECK_THROWS_AS(Trainer(Method::rpl, *env, nullptr, small_config(), 0), ConfigError);
  CHECK_THROWS_AS(Trainer(Method::initial_only, *env, &base, small_config(), 0), ConfigError);
  AgentConfig h = small_config();
  h.history_length = 1;
  CHECK_THROWS_AS(Trainer(Method::scratch, *env, &base, h, 0), ConfigError);
  AgentConfig bad = small_config();
  bad.her_prob = 1.5;
  CHECK_THROWS_AS(Trainer(Method::rpl, *env, &base, bad, 0), ConfigError);
}

TEST_CASE("residual environment equals the wrapped policy") {
  auto env = task("push");
  Rng r(14);
  for (int trial = 0; trial < 10; ++trial) {
    controllers::ReactivePush base;
    ResidualEnv renv(task("push"), base.clone());
    auto plain = task("push");
    Observation o1 = plain->reset(trial);
    Observation o2 = renv.reset(trial);
    for (int t = 0; t < plain->spec().horizon; ++t) {
      const Vec f = testgen::vec(r, 4);
      const auto s1 = plain->step(compose_action(base.act(o1), f));
      const auto s2 = renv.step(f);
      CHECK(s1.observation.state == s2.observation.state);
      CHECK(s1.reward == s2.reward);
      o1 = s1.observation;
      o2 = s2.observation;
    }
  }
}

TEST_CASE("agent config parsing") {
  ConfigSection s;
  s.set("critic_action", "composed");
  s.set("action_l2_target", "composed");
  s.set("hidden", "32, 32");
  const AgentConfig c = agent_config_from(s);
  CHECK_FALSE(c.critic_on_residual);
  CHECK(c.action_l2_target == L2Target::composed);
  CHECK(c.hidden == std::vector<int>{32, 32});
  const AgentConfig d = agent_config_from(ConfigSection{});
  CHECK(d.critic_on_residual);
  CHECK(d.action_l2_target == L2Target::residual);
  ConfigSection bad;
  bad.set("critic_action", "both");
  CHECK_THROWS_AS(agent_config_from(bad), ConfigError);
}
