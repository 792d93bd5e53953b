#include "rpl/agent/policy.hpp"

#include "rpl/common/error.hpp"

namespace rpl::agent {

Method parse_method(const std::string& name) {
  if (name == "rpl") return Method::rpl;
  if (name == "scratch") return Method::scratch;
  if (name == "expert_explore") return Method::expert_explore;
  if (name == "initial_only") return Method::initial_only;
  throw ConfigError("unknown method '" + name + "' (rpl, scratch, expert_explore, initial_only)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::rpl: return "rpl";
    case Method::scratch: return "scratch";
    case Method::expert_explore: return "expert_explore";
    case Method::initial_only: return "initial_only";
  }
  return "?";
}

Vec Normalizers::input(const Vec& s, const Vec& g) const {
  Vec x(state.dim() + goal.dim());
  x << state.normalize(s), goal.normalize(g);
  return x;
}

Vec compose_action(const Vec& base, const Vec& residual) {
  require(base.size() == residual.size(), "compose_action: base and residual dimensions differ");
  Vec a = base;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (residual(i) != 0.0) a(i) += residual(i);
  return envs::clip_action(a);
}

Vec residual_output(const ResidualPolicy& p, const Observation& obs, const Observation* prev) {
  require(p.residual != nullptr && p.normalizers != nullptr, "residual_act: policy is incomplete");
  require(p.history_length == 0 || p.history_length == 1, "residual_act: history_length must be 0 or 1");
  if (p.history_length == 1 && prev == nullptr)
    throw ContractError("residual_act: history_length 1 requires the previous observation");
  if (p.history_length == 0 && prev != nullptr)
    throw ContractError("residual_act: previous observation given without history");
  const Vec f = p.residual->forward(p.normalizers->input(obs.state, obs.desired_goal));
  if (p.history_length == 0) return f;
  const Vec f_prev = p.residual->forward(p.normalizers->input(prev->state, obs.desired_goal));
  return 0.5 * (f_prev + f);
}

Vec residual_act(ResidualPolicy& p, const Observation& obs, const Observation* prev) {
  const Vec f = residual_output(p, obs, prev);
  const Vec base = p.base ? p.base->act(obs) : Vec::Zero(f.size());
  return compose_action(base, f);
}

Vec squashed_act(const net::Mlp& actor, const Normalizers& n, const Observation& obs) {
  return actor.forward(n.input(obs.state, obs.desired_goal)).array().tanh().matrix();
}

namespace {

Vec uniform_action(Eigen::Index dim, Rng& rng) {
  Vec a(dim);
  for (Eigen::Index i = 0; i < dim; ++i) a(i) = rng.uniform(-1.0, 1.0);
  return a;
}

}  // namespace

Vec explore_act(const Vec& action, const ExploreParams& params, Rng& rng, bool* random_branch) {
  require(params.random_action_prob >= 0.0 && params.random_action_prob <= 1.0,
          "explore_act: random_action_prob must lie in [0, 1]");
  require(params.noise_scale >= 0.0, "explore_act: noise_scale must be non-negative");
  const bool random = rng.uniform() < params.random_action_prob;
  if (random_branch) *random_branch = random;
  if (random) return uniform_action(action.size(), rng);
  Vec a = action;
  if (params.noise_scale > 0.0)
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += params.noise_scale * rng.normal();
  return envs::clip_action(a);
}

Vec expert_explore_act(const net::Mlp& learned, const Normalizers& normalizers, controllers::Controller& expert,
                       const Observation& obs, double epsilon, double alpha, Rng& rng, ExpertExploreBranch* branch) {
  require(epsilon >= 0.0 && epsilon <= 1.0 && alpha >= 0.0 && alpha <= 1.0,
          "expert_explore_act: epsilon and alpha must lie in [0, 1]");
  const double z = rng.uniform();
  ExpertExploreBranch b = z < epsilon * alpha ? ExpertExploreBranch::expert
                          : z < epsilon       ? ExpertExploreBranch::random
                                              : ExpertExploreBranch::learned;
  if (branch) *branch = b;
  switch (b) {
    case ExpertExploreBranch::expert: return envs::clip_action(expert.act(obs));
    case ExpertExploreBranch::random: return uniform_action(learned.output_dim(), rng);
    case ExpertExploreBranch::learned: break;
  }
  return squashed_act(learned, normalizers, obs);
}

ResidualEnv::ResidualEnv(std::unique_ptr<envs::GoalEnv> inner, std::unique_ptr<controllers::Controller> base)
    : inner_(std::move(inner)), base_(std::move(base)) {
  require(inner_ && base_, "ResidualEnv: environment and base controller are required");
  require(base_->action_dim() == inner_->spec().action_dim, "ResidualEnv: controller action_dim mismatch");
}

ResidualEnv::ResidualEnv(const ResidualEnv& other)
    : envs::GoalEnv(other), inner_(other.inner_->clone()), base_(other.base_->clone()),
      last_applied_(other.last_applied_) {}

envs::StepResult ResidualEnv::step(const Vec& action) {
  require(action.size() == spec().action_dim, "ResidualEnv::step: action has wrong dimension");
  ++step_calls_;
  last_applied_ = compose_action(base_->act(inner_->observe()), envs::clip_action(action));
  return inner_->step(last_applied_);
}

}  // namespace rpl::agent
