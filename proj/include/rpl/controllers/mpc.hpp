#pragma once

#include <memory>
#include <vector>

#include "rpl/controllers/controller.hpp"

namespace rpl::controllers {

struct MpcConfig {
  int expansions_per_step = 10;
  double object_radius = 0.025 * 1.7320508075688772;  // circumscribed sphere of the cube
  double tie_tolerance = 1e-9;
};

// Heuristic value of a search node: object-goal distance, then
// gripper-push-location distance as a tie breaker.
struct MpcHeuristic {
  double d1 = 0.0;
  double d2 = 0.0;
};

// True when a ranks strictly better than b.
bool heuristic_less(const MpcHeuristic& a, const MpcHeuristic& b, double tie_tolerance);
MpcHeuristic mpc_heuristic(const Observation& obs, double object_radius);

// The six unit moves along +-x, +-y, +-z (finger component zero).
std::vector<Vec> cardinal_actions(int action_dim);

struct MpcResult {
  Vec action;
  MpcHeuristic best;
  int expansions = 0;
  int model_steps = 0;  // calls to step() on the model and its snapshots
  bool noop = false;
};

// Best-first search over sequences of cardinal moves, simulated on `model`
// after restoring it to `obs`. Search depth is capped at the steps left in the
// episode. Throws ContractError when the model cannot be restored.
MpcResult mpc_search(const Observation& obs, envs::GoalEnv& model, const MpcConfig& cfg);
Vec mpc_act(const Observation& obs, envs::GoalEnv& model, const MpcConfig& cfg);

// Controller owning its own model instance; not shareable between workers,
// clone() gives each worker a private model.
class DiscreteMpcPush : public Controller {
 public:
  DiscreteMpcPush(std::unique_ptr<envs::GoalEnv> model, MpcConfig cfg = {});
  DiscreteMpcPush(const DiscreteMpcPush& other);

  std::string name() const override { return "mpc_push"; }
  int action_dim() const override { return model_->spec().action_dim; }
  Vec act(const Observation& obs) override { return mpc_act(obs, *model_, cfg_); }
  std::unique_ptr<Controller> clone() const override { return std::make_unique<DiscreteMpcPush>(*this); }
  const envs::GoalEnv& model() const { return *model_; }

 private:
  std::unique_ptr<envs::GoalEnv> model_;
  MpcConfig cfg_;
};

}  // namespace rpl::controllers
