#include "rpl/agent/ddpg.hpp"

#include <cmath>
#include <sstream>

#include "rpl/common/error.hpp"
#include "rpl/common/random.hpp"

namespace rpl::agent {

ActorCritic make_actor_critic(ActorKind kind, int history_length, int state_dim, int goal_dim, int action_dim,
                              const std::vector<int>& hidden, std::uint64_t seed, double actor_lr, double critic_lr,
                              double beta1, double beta2, double eps) {
  require(history_length == 0 || history_length == 1, "make_actor_critic: history_length must be 0 or 1");
  ActorCritic ac;
  ac.kind = kind;
  ac.history_length = history_length;
  const int in = state_dim + goal_dim;
  const int critic_in = in + history_length * state_dim + action_dim;
  ac.actor = net::Mlp::with_hidden(in, action_dim, hidden);
  ac.critic = net::Mlp::with_hidden(critic_in, 1, hidden);
  if (kind == ActorKind::residual)
    net::init_residual(ac.actor, derive_seed(seed, 1));
  else
    net::init_he_uniform(ac.actor, derive_seed(seed, 1));
  net::init_he_uniform(ac.critic, derive_seed(seed, 2));
  ac.actor_target = ac.actor;
  ac.critic_target = ac.critic;
  ac.actor_opt = net::AdamState(ac.actor, actor_lr, beta1, beta2, eps);
  ac.critic_opt = net::AdamState(ac.critic, critic_lr, beta1, beta2, eps);
  return ac;
}

ActorEval eval_actor(const net::Mlp& actor, ActorKind kind, int history_length, const Mat& in, const Mat& in_prev,
                     const Mat& base) {
  ActorEval ev;
  ev.trace = net::forward_trace(actor, in);
  ev.f = ev.trace.output();
  if (history_length == 1) {
    require(in_prev.rows() == in.rows() && in_prev.cols() == in.cols(), "eval_actor: history input shape mismatch");
    ev.trace_prev = net::forward_trace(actor, in_prev);
    ev.f = 0.5 * (ev.trace_prev.output() + ev.f);
  }
  if (kind == ActorKind::residual) {
    require(base.rows() == ev.f.rows() && base.cols() == ev.f.cols(), "eval_actor: base action shape mismatch");
    ev.a = base + ev.f;
  } else {
    ev.a = ev.f.array().tanh().matrix();
  }
  return ev;
}

Mat stack_critic_input(const Mat& critic_obs, const Mat& actions) {
  require(critic_obs.cols() == actions.cols(), "stack_critic_input: batch sizes differ");
  Mat x(critic_obs.rows() + actions.rows(), critic_obs.cols());
  x << critic_obs, actions;
  return x;
}

Vec critic_targets(const ActorCritic& ac, const TrainBatch& b, const DdpgParams& p) {
  ActorEval ev = eval_actor(ac.actor_target, ac.kind, ac.history_length, b.next_actor_in, b.next_actor_in_prev,
                            b.base_next);
  Mat a_next = ev.a.cwiseMax(-1.0).cwiseMin(1.0);
  if (p.critic_on_residual && ac.kind == ActorKind::residual) a_next -= b.base_next;
  const Mat q = ac.critic_target.forward_batch(stack_critic_input(b.next_critic_obs, a_next));
  Vec y = b.rewards + p.gamma * q.row(0).transpose();
  if (p.clip_target) y = y.cwiseMax(p.target_min).cwiseMin(p.target_max);
  return y;
}

double critic_loss(const net::Mlp& critic, const TrainBatch& b, const Vec& y) {
  const Mat q = critic.forward_batch(stack_critic_input(b.critic_obs, b.actions));
  return (q.row(0).transpose() - y).squaredNorm() / b.size();
}

LossGrad critic_loss_grad(const net::Mlp& critic, const TrainBatch& b, const Vec& y) {
  require(y.size() == b.size(), "critic_loss_grad: target count differs from batch size");
  const net::ForwardTrace trace = net::forward_trace(critic, stack_critic_input(b.critic_obs, b.actions));
  const Eigen::RowVectorXd diff = trace.output().row(0) - y.transpose();
  LossGrad out;
  out.loss = diff.squaredNorm() / b.size();
  out.tape = net::backward(critic, trace, (2.0 / b.size()) * diff);
  return out;
}

namespace {

struct ActorPass {
  ActorEval ev;
  net::ForwardTrace critic_trace;
  double loss = 0.0;
};

ActorPass actor_pass(const ActorCritic& ac, const TrainBatch& b, const DdpgParams& p) {
  ActorPass pass;
  pass.ev = eval_actor(ac.actor, ac.kind, ac.history_length, b.actor_in, b.actor_in_prev, b.base);
  const bool residual_critic = p.critic_on_residual && ac.kind == ActorKind::residual;
  pass.critic_trace = net::forward_trace(ac.critic, stack_critic_input(b.critic_obs, residual_critic ? pass.ev.f : pass.ev.a));
  const bool on_residual = ac.kind == ActorKind::residual && p.l2_target == L2Target::residual;
  const Mat& penalised = on_residual ? pass.ev.f : pass.ev.a;
  pass.loss = -pass.critic_trace.output().mean() + p.action_l2 * penalised.squaredNorm() / penalised.size();
  return pass;
}

}  // namespace

double actor_loss(const ActorCritic& ac, const TrainBatch& b, const DdpgParams& p) { return actor_pass(ac, b, p).loss; }

LossGrad actor_loss_grad(const ActorCritic& ac, const TrainBatch& b, const DdpgParams& p) {
  const ActorPass pass = actor_pass(ac, b, p);
  const int n = b.size();
  const int action_dim = static_cast<int>(pass.ev.a.rows());
  const Mat q_grad = Mat::Constant(1, n, -1.0 / n);
  const net::GradientTape critic_tape = net::backward(ac.critic, pass.critic_trace, q_grad, true);
  Mat d_a = critic_tape.input.bottomRows(action_dim);
  const double l2 = 2.0 * p.action_l2 / (static_cast<double>(n) * action_dim);
  Mat d_f;
  if (ac.kind == ActorKind::residual) {
    if (p.l2_target == L2Target::residual)
      d_f = d_a + l2 * pass.ev.f;
    else
      d_f = d_a + l2 * pass.ev.a;
  } else {
    d_a += l2 * pass.ev.a;
    d_f = d_a.array() * (1.0 - pass.ev.a.array().square());
  }
  LossGrad out;
  out.loss = pass.loss;
  if (ac.history_length == 1) {
    out.tape = net::backward(ac.actor, pass.ev.trace, 0.5 * d_f);
    out.tape += net::backward(ac.actor, pass.ev.trace_prev, 0.5 * d_f);
  } else {
    out.tape = net::backward(ac.actor, pass.ev.trace, d_f);
  }
  return out;
}

namespace {

[[noreturn]] void numeric_failure(const char* what, double loss, const TrainBatch& b, const Vec& y) {
  std::ostringstream msg;
  msg << "ddpg_update: non-finite " << what << " loss (" << loss << ") on a batch of " << b.size()
      << "; rewards in [" << b.rewards.minCoeff() << ", " << b.rewards.maxCoeff() << "], targets in ["
      << y.minCoeff() << ", " << y.maxCoeff() << "], max |action| " << b.actions.cwiseAbs().maxCoeff();
  throw NumericError(msg.str());
}

}  // namespace

UpdateStats ddpg_update(ActorCritic& ac, const TrainBatch& b, const DdpgParams& p, bool update_actor) {
  require(b.size() >= 1, "ddpg_update: empty batch");
  const Vec y = critic_targets(ac, b, p);
  LossGrad critic = critic_loss_grad(ac.critic, b, y);
  if (!std::isfinite(critic.loss)) numeric_failure("critic", critic.loss, b, y);
  UpdateStats stats;
  stats.critic_loss = critic.loss;
  stats.target_mean = y.mean();
  LossGrad actor;
  if (update_actor) {
    actor = actor_loss_grad(ac, b, p);
    if (!std::isfinite(actor.loss)) numeric_failure("actor", actor.loss, b, y);
    stats.actor_loss = actor.loss;
  }
  net::adam_step(ac.critic, ac.critic_opt, critic.tape);
  if (update_actor) net::adam_step(ac.actor, ac.actor_opt, actor.tape);
  return stats;
}

void update_targets(ActorCritic& ac, double polyak) {
  net::polyak_update(ac.actor_target, ac.actor, polyak);
  net::polyak_update(ac.critic_target, ac.critic, polyak);
}

void BurnInGate::record(double window_loss) {
  ++readings_;
  if (!open_ && window_loss < beta_) {
    open_ = true;
    opened_at_ = readings_;
  }
}

bool burn_in_gate(const std::vector<double>& window_losses, double beta) {
  BurnInGate gate(beta);
  for (double l : window_losses) gate.record(l);
  return gate.open();
}

}  // namespace rpl::agent
