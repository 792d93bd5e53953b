#include "rpl/envs/noise.hpp"

#include "rpl/common/error.hpp"
#include "rpl/common/random.hpp"

namespace rpl::envs {

namespace {
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kComponentsPerStep = 64;
}  // namespace

NoiseWrapper::NoiseWrapper(std::unique_ptr<GoalEnv> inner, double noise_std)
    : inner_(std::move(inner)), noise_std_(noise_std) {
  require(inner_ != nullptr, "NoiseWrapper: inner environment is null");
  require(noise_std_ >= 0.0, "NoiseWrapper: noise_std must be non-negative");
  require(inner_->spec().state_dim <= static_cast<int>(kComponentsPerStep), "NoiseWrapper: state too wide");
  current_ = corrupt(inner_->observe());
}

NoiseWrapper::NoiseWrapper(const NoiseWrapper& other)
    : GoalEnv(other), inner_(other.inner_->clone()), noise_std_(other.noise_std_), key_(other.key_),
      current_(other.current_) {}

Observation NoiseWrapper::corrupt(const Observation& clean) const {
  Observation obs = clean;
  if (noise_std_ == 0.0) return obs;
  const std::uint64_t base = static_cast<std::uint64_t>(clean.step_index) * kComponentsPerStep;
  for (int c : inner_->noisy_components()) obs.state(c) += noise_std_ * counter_normal(key_, base + c);
  inner_->refresh_derived(obs.state);
  obs.achieved_goal = inner_->achieved_goal_of(obs.state);
  return obs;
}

Observation NoiseWrapper::reset(std::uint64_t seed) {
  key_ = derive_seed(seed, kNoiseStream);
  current_ = corrupt(inner_->reset(seed));
  return current_;
}

StepResult NoiseWrapper::step(const Vec& action) {
  ++step_calls_;
  StepResult result = inner_->step(action);
  current_ = corrupt(result.observation);
  result.observation = current_;
  result.reward = compute_reward(current_.achieved_goal, current_.desired_goal);
  return result;
}

double NoiseWrapper::compute_reward(const Vec& achieved, const Vec& desired) const {
  return inner_->compute_reward(achieved, desired);
}

}  // namespace rpl::envs
