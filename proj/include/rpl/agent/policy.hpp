#pragma once

#include <memory>
#include <string>

#include "rpl/agent/normalizer.hpp"
#include "rpl/common/random.hpp"
#include "rpl/controllers/controller.hpp"
#include "rpl/envs/goal_env.hpp"
#include "rpl/net/mlp.hpp"

namespace rpl::agent {

using envs::Observation;

enum class Method { rpl, scratch, expert_explore, initial_only };

Method parse_method(const std::string& name);
std::string to_string(Method m);

// State and goal statistics feeding every network input.
struct Normalizers {
  Normalizer state;
  Normalizer goal;

  Normalizers() = default;
  Normalizers(int state_dim, int goal_dim, double clip_raw = 200.0, double clip_norm = 5.0, double eps = 0.01)
      : state(state_dim, clip_raw, clip_norm, eps), goal(goal_dim, clip_raw, clip_norm, eps) {}

  // [normalized state; normalized goal]
  Vec input(const Vec& state, const Vec& goal) const;
  bool operator==(const Normalizers& o) const { return state == o.state && goal == o.goal; }
};

// base + residual, clipped to [-1, 1]. Components where the residual is
// exactly zero keep the base value bit-for-bit (signed zeros included).
Vec compose_action(const Vec& base, const Vec& residual);

// The composed policy clip(pi(s) + f(s, g)). With history_length 1 the
// residual is averaged over the previous and current observations.
struct ResidualPolicy {
  controllers::Controller* base = nullptr;
  const net::Mlp* residual = nullptr;
  const Normalizers* normalizers = nullptr;
  int history_length = 0;
};

// f averaged per history_length. prev must be given iff history_length is 1;
// on the first step of an episode pass the current observation twice.
Vec residual_output(const ResidualPolicy& policy, const Observation& obs, const Observation* prev);
Vec residual_act(ResidualPolicy& policy, const Observation& obs, const Observation* prev);

// tanh-squashed output of a stand-alone actor (scratch and Expert-Explore).
Vec squashed_act(const net::Mlp& actor, const Normalizers& normalizers, const Observation& obs);

struct ExploreParams {
  double random_action_prob = 0.3;
  double noise_scale = 0.2;
};

// With probability random_action_prob a uniform action in [-1, 1]^D, else
// clip(action + N(0, noise_scale^2)). `random_branch` reports the branch.
Vec explore_act(const Vec& policy_action, const ExploreParams& params, Rng& rng, bool* random_branch = nullptr);

enum class ExpertExploreBranch { expert = 0, random = 1, learned = 2 };

// z ~ U[0, 1): z < eps*alpha -> expert, eps*alpha <= z < eps -> uniform
// random, otherwise the learned actor alone.
Vec expert_explore_act(const net::Mlp& learned, const Normalizers& normalizers, controllers::Controller& expert,
                       const Observation& obs, double epsilon, double alpha, Rng& rng,
                       ExpertExploreBranch* branch = nullptr);

// The residual MDP: stepping with action a applies clip(pi(s) + a) to the
// wrapped environment.
class ResidualEnv : public envs::GoalEnv {
 public:
  ResidualEnv(std::unique_ptr<envs::GoalEnv> inner, std::unique_ptr<controllers::Controller> base);
  ResidualEnv(const ResidualEnv& other);

  const envs::EnvSpec& spec() const override { return inner_->spec(); }
  std::string name() const override { return "residual_" + inner_->name(); }
  Observation reset(std::uint64_t seed) override { return inner_->reset(seed); }
  envs::StepResult step(const Vec& action) override;
  double compute_reward(const Vec& a, const Vec& d) const override { return inner_->compute_reward(a, d); }
  Vec achieved_goal_of(const Vec& state) const override { return inner_->achieved_goal_of(state); }
  bool is_success(const Observation& o, double r) const override { return inner_->is_success(o, r); }
  Observation observe() const override { return inner_->observe(); }
  int step_index() const override { return inner_->step_index(); }
  std::unique_ptr<envs::GoalEnv> clone() const override { return std::make_unique<ResidualEnv>(*this); }

  // Action actually applied to the wrapped environment by the last step.
  const Vec& last_applied() const { return last_applied_; }

 private:
  std::unique_ptr<envs::GoalEnv> inner_;
  std::unique_ptr<controllers::Controller> base_;
  Vec last_applied_;
};

}  // namespace rpl::agent
