#include "rpl/agent/rollout.hpp"

#include "rpl/common/error.hpp"
#include "rpl/common/random.hpp"

namespace rpl::agent {

namespace {

constexpr std::uint64_t kTopBit = 1ULL << 63;

ResidualPolicy residual_view(const PolicyView& p) {
  ResidualPolicy r;
  r.base = p.base;
  r.residual = &p.ac->actor;
  r.normalizers = p.normalizers;
  r.history_length = p.ac->history_length;
  return r;
}

void check_view(const PolicyView& p) {
  if (p.method != Method::initial_only)
    require(p.ac != nullptr && p.normalizers != nullptr, "policy view lacks networks");
  if (p.method == Method::rpl || p.method == Method::expert_explore || p.method == Method::initial_only)
    require(p.base != nullptr, "policy view lacks an initial controller");
}

}  // namespace

Vec policy_act(const PolicyView& p, const Observation& obs, const Observation* prev) {
  check_view(p);
  switch (p.method) {
    case Method::initial_only: return envs::clip_action(p.base->act(obs));
    case Method::rpl: {
      ResidualPolicy r = residual_view(p);
      return residual_act(r, obs, r.history_length ? prev : nullptr);
    }
    case Method::scratch:
    case Method::expert_explore: return squashed_act(p.ac->actor, *p.normalizers, obs);
  }
  return {};
}

EpisodeResult run_episode(envs::GoalEnv& env, const PolicyView& p, std::uint64_t seed, const ExploreSettings* explore,
                          Rng* rng, bool record_trajectory, ExploreCounts* counts) {
  check_view(p);
  require(explore == nullptr || rng != nullptr, "run_episode: exploration needs an rng");
  const int horizon = env.spec().horizon;
  const bool store_base = p.method == Method::rpl;
  EpisodeResult result;
  result.episode.reserve(horizon);
  Observation obs = env.reset(seed);
  Observation prev = obs;
  Vec base_now;
  for (int t = 0; t < horizon; ++t) {
    Vec action;
    if (store_base) base_now = envs::clip_action(p.base->act(obs));
    if (explore == nullptr || p.method == Method::initial_only) {
      if (p.method == Method::rpl) {
        ResidualPolicy r = residual_view(p);
        action = compose_action(base_now, residual_output(r, obs, r.history_length ? &prev : nullptr));
      } else {
        action = policy_act(p, obs, &prev);
      }
    } else if (p.method == Method::rpl) {
      ResidualPolicy r = residual_view(p);
      const Vec f = residual_output(r, obs, r.history_length ? &prev : nullptr);
      bool random = false;
      action = compose_action(base_now, explore_act(f, explore->params, *rng, &random));
      if (counts) ++(random ? counts->random : counts->noisy);
    } else if (p.method == Method::scratch) {
      bool random = false;
      action = explore_act(squashed_act(p.ac->actor, *p.normalizers, obs), explore->params, *rng, &random);
      if (counts) ++(random ? counts->random : counts->noisy);
    } else {
      ExpertExploreBranch branch;
      action = expert_explore_act(p.ac->actor, *p.normalizers, *p.base, obs, explore->epsilon, explore->alpha, *rng,
                                  &branch);
      if (counts) {
        if (branch == ExpertExploreBranch::expert) ++counts->expert;
        else if (branch == ExpertExploreBranch::random) ++counts->ee_random;
        else ++counts->learned;
      }
    }
    const envs::StepResult step = env.step(action);
    if (record_trajectory)
      result.trajectory.push_back({t, obs.state, action, step.reward, step.observation.achieved_goal, obs.desired_goal});
    Transition tr;
    tr.state = obs.state;
    tr.prev_state = prev.state;
    tr.action = envs::clip_action(action);
    tr.reward = step.reward;
    tr.next_state = step.observation.state;
    tr.achieved_goal = obs.achieved_goal;
    tr.achieved_goal_next = step.observation.achieved_goal;
    tr.desired_goal = obs.desired_goal;
    tr.step_index = t;
    if (store_base) {
      tr.base_action = base_now;
      if (t > 0) result.episode.back().base_action_next = base_now;
    }
    result.episode.push_back(std::move(tr));
    prev = std::move(obs);
    obs = step.observation;
    result.final_reward = step.reward;
  }
  if (store_base) {
    Observation at_goal = obs;
    at_goal.desired_goal = result.episode.back().desired_goal;
    result.episode.back().base_action_next = envs::clip_action(p.base->act(at_goal));
  }
  result.success = env.is_success(obs, result.final_reward);
  return result;
}

std::uint64_t training_seed(std::uint64_t stream_seed, std::uint64_t episode) {
  return derive_seed(stream_seed, episode) & ~kTopBit;
}

std::uint64_t evaluation_seed(std::uint64_t seed, std::uint64_t episode) {
  return derive_seed(seed ^ 0x6576616c75617465ULL, episode) | kTopBit;
}

EvalResult evaluate(envs::GoalEnv& env, const PolicyView& policy, int n, std::uint64_t seed, bool keep) {
  require(n >= 1, "evaluate: need at least one rollout");
  EvalResult out;
  int successes = 0;
  for (int i = 0; i < n; ++i) {
    EpisodeResult r = run_episode(env, policy, evaluation_seed(seed, i), nullptr, nullptr, keep);
    successes += r.success ? 1 : 0;
    if (keep) out.trajectories.push_back(std::move(r.trajectory));
  }
  out.success_rate = static_cast<double>(successes) / n;
  return out;
}

}  // namespace rpl::agent
