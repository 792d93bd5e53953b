#pragma once

#include <memory>

#include "rpl/envs/goal_env.hpp"

namespace rpl::envs {

// Adds IID Gaussian noise to the inner environment's noisy components (object
// and tool poses) on every observation. Gripper coordinates stay exact. The
// achieved goal and the reward are computed from the noised state.
//
// Noise draws come from a counter-based stream keyed on the reset seed, so a
// given (seed, step, component) always receives the same draw.
class NoiseWrapper : public GoalEnv {
 public:
  NoiseWrapper(std::unique_ptr<GoalEnv> inner, double noise_std);
  NoiseWrapper(const NoiseWrapper& other);

  const EnvSpec& spec() const override { return inner_->spec(); }
  std::string name() const override { return inner_->name(); }

  Observation reset(std::uint64_t seed) override;
  StepResult step(const Vec& action) override;
  double compute_reward(const Vec& achieved, const Vec& desired) const override;
  Vec achieved_goal_of(const Vec& state) const override { return inner_->achieved_goal_of(state); }
  Observation observe() const override { return current_; }
  int step_index() const override { return inner_->step_index(); }
  std::unique_ptr<GoalEnv> clone() const override { return std::make_unique<NoiseWrapper>(*this); }
  std::vector<int> noisy_components() const override { return inner_->noisy_components(); }
  void refresh_derived(Vec& state) const override { inner_->refresh_derived(state); }

  double noise_std() const { return noise_std_; }
  const GoalEnv& inner() const { return *inner_; }
  // Noise-free observation of the wrapped environment.
  Observation clean_observation() const { return inner_->observe(); }

 private:
  Observation corrupt(const Observation& clean) const;

  std::unique_ptr<GoalEnv> inner_;
  double noise_std_;
  std::uint64_t key_ = 0;
  Observation current_;
};

}  // namespace rpl::envs
