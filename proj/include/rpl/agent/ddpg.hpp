#pragma once

#include <cstdint>
#include <vector>

#include "rpl/agent/normalizer.hpp"
#include "rpl/net/mlp.hpp"

namespace rpl::agent {

// How the actor network's output becomes an action.
//   residual: a = base + f (base from the initial controller)
//   squashed: a = tanh(f)
enum class ActorKind { residual, squashed };

// Which vector the action-magnitude penalty applies to.
enum class L2Target { composed, residual };

struct DdpgParams {
  double gamma = 0.98;
  double action_l2 = 1.0;
  L2Target l2_target = L2Target::composed;
  bool critic_on_residual = false;  // residual kind: critic sees a - base
  bool clip_target = true;  // y clipped to [target_min, target_max]
  double target_min = 0.0;
  double target_max = 50.0;
};

struct ActorCritic {
  ActorKind kind = ActorKind::residual;
  int history_length = 0;
  net::Mlp actor, critic, actor_target, critic_target;
  net::AdamState actor_opt, critic_opt;
};

// Actor input [norm s; norm g] (in_dim = S + G). Critic input is
// [norm s; norm g; a], or [norm s_prev; norm s; norm g; a] with history.
// Actor and critic hidden layers are He-initialised from `seed`; for the
// residual kind the actor's final layer is zero. Targets start as copies.
ActorCritic make_actor_critic(ActorKind kind, int history_length, int state_dim, int goal_dim, int action_dim,
                              const std::vector<int>& hidden, std::uint64_t seed, double actor_lr = 1e-3,
                              double critic_lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Normalized training batch, one column per sample. With history, *_prev
// hold [norm s_prev; norm g]; the previous state of s' is s, so
// next_actor_in_prev equals actor_in.
struct TrainBatch {
  Mat actor_in, actor_in_prev;
  Mat next_actor_in, next_actor_in_prev;
  Mat critic_obs, next_critic_obs;  // critic inputs without the action rows
  Mat base, base_next;              // initial-controller actions (residual kind)
  Mat actions;
  Vec rewards;

  int size() const { return static_cast<int>(actions.cols()); }
};

// Network outputs for the actor and the resulting (unclipped) actions.
struct ActorEval {
  net::ForwardTrace trace, trace_prev;
  Mat f;  // averaged network output
  Mat a;  // base + f, or tanh(f)
};

ActorEval eval_actor(const net::Mlp& actor, ActorKind kind, int history_length, const Mat& in, const Mat& in_prev,
                     const Mat& base);

Mat stack_critic_input(const Mat& critic_obs, const Mat& actions);

// y = r + gamma * Q_target(s', clip(pi_target(s')), g), clipped if enabled.
Vec critic_targets(const ActorCritic& ac, const TrainBatch& batch, const DdpgParams& params);

struct LossGrad {
  double loss = 0.0;
  net::GradientTape tape;
};

// Mean squared Bellman error against fixed targets y, and its gradient.
LossGrad critic_loss_grad(const net::Mlp& critic, const TrainBatch& batch, const Vec& y);
double critic_loss(const net::Mlp& critic, const TrainBatch& batch, const Vec& y);

// -mean Q(s, a(s)) + action_l2 * mean(p^2) with p the penalised vector and
// the mean taken over batch and action components,
// differentiated through the actor only. The critic's action-input gradient
// carries the policy gradient; actions inside this loss are not clipped.
LossGrad actor_loss_grad(const ActorCritic& ac, const TrainBatch& batch, const DdpgParams& params);
double actor_loss(const ActorCritic& ac, const TrainBatch& batch, const DdpgParams& params);

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double target_mean = 0.0;
};

// One critic Adam step and, if update_actor, one actor Adam step. Both
// gradients are taken at the pre-update parameters. Target networks are not
// touched. Throws NumericError on a non-finite loss.
UpdateStats ddpg_update(ActorCritic& ac, const TrainBatch& batch, const DdpgParams& params, bool update_actor);

// target <- polyak * target + (1 - polyak) * online for actor and critic.
void update_targets(ActorCritic& ac, double polyak);

// Latching burn-in gate over per-cycle mean critic losses.
class BurnInGate {
 public:
  explicit BurnInGate(double beta = 1.0) : beta_(beta) {}

  double beta() const { return beta_; }
  bool open() const { return open_; }
  // Number of readings taken before (and including) the one that opened it.
  long opened_at() const { return opened_at_; }
  long readings() const { return readings_; }
  void record(double window_loss);
  void restore(bool open, long readings, long opened_at) {
    open_ = open;
    readings_ = readings;
    opened_at_ = opened_at;
  }

 private:
  double beta_;
  bool open_ = false;
  long readings_ = 0;
  long opened_at_ = -1;
};

// Gate state after the given sequence of windowed losses.
bool burn_in_gate(const std::vector<double>& window_losses, double beta);

}  // namespace rpl::agent
