#include "rpl/controllers/mpc.hpp"

#include <cmath>
#include <limits>

#include "rpl/common/error.hpp"
#include "rpl/controllers/reactive.hpp"
#include "rpl/envs/push_world.hpp"

namespace rpl::controllers {

bool heuristic_less(const MpcHeuristic& a, const MpcHeuristic& b, double tie_tolerance) {
  if (std::abs(a.d1 - b.d1) <= tie_tolerance) return a.d2 < b.d2;
  return a.d1 < b.d1;
}

MpcHeuristic mpc_heuristic(const Observation& obs, double object_radius) {
  const Vec object = obs.achieved_goal;
  const Vec gripper = obs.state.segment<3>(envs::layout::kGripperPos);
  MpcHeuristic h;
  h.d1 = (object - obs.desired_goal).norm();
  // The push location is undefined once the object sits on the goal.
  h.d2 = h.d1 <= 1e-9 ? 0.0 : (gripper - push_location(object, obs.desired_goal, object_radius)).norm();
  return h;
}

std::vector<Vec> cardinal_actions(int action_dim) {
  require(action_dim >= 3, "cardinal_actions: need at least three action components");
  std::vector<Vec> out;
  for (int axis = 0; axis < 3; ++axis) {
    for (double sign : {1.0, -1.0}) {
      Vec a = Vec::Zero(action_dim);
      a(axis) = sign;
      out.push_back(a);
    }
  }
  return out;
}

namespace {

struct Node {
  std::unique_ptr<envs::GoalEnv> sim;
  MpcHeuristic h;
  int depth = 0;
  int first_action = -1;
};

}  // namespace

MpcResult mpc_search(const Observation& obs, envs::GoalEnv& model, const MpcConfig& cfg) {
  require(cfg.expansions_per_step >= 1, "mpc: expansions_per_step must be >= 1");
  if (!model.restore(obs)) throw ContractError("mpc: model cannot be reset to the observed state");
  const int depth_limit = model.spec().horizon - obs.step_index;
  const std::vector<Vec> actions = cardinal_actions(model.spec().action_dim);

  std::vector<Node> nodes;
  nodes.push_back(Node{model.clone(), mpc_heuristic(model.observe(), cfg.object_radius), 0, -1});
  std::vector<std::size_t> frontier = {0};
  std::size_t best = 0;
  MpcResult result;
  while (result.expansions < cfg.expansions_per_step && !frontier.empty()) {
    // Earliest-inserted node wins exact ties.
    std::size_t pick = 0;
    for (std::size_t i = 1; i < frontier.size(); ++i)
      if (heuristic_less(nodes[frontier[i]].h, nodes[frontier[pick]].h, cfg.tie_tolerance)) pick = i;
    const std::size_t id = frontier[pick];
    frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));
    ++result.expansions;
    if (nodes[id].depth >= depth_limit) continue;
    for (std::size_t k = 0; k < actions.size(); ++k) {
      Node child;
      child.sim = nodes[id].sim->clone();
      const envs::StepResult step = child.sim->step(actions[k]);
      ++result.model_steps;
      child.h = mpc_heuristic(step.observation, cfg.object_radius);
      child.depth = nodes[id].depth + 1;
      child.first_action = nodes[id].first_action < 0 ? static_cast<int>(k) : nodes[id].first_action;
      nodes.push_back(std::move(child));
      const std::size_t cid = nodes.size() - 1;
      frontier.push_back(cid);
      if (heuristic_less(nodes[cid].h, nodes[best].h, cfg.tie_tolerance)) best = cid;
    }
  }
  result.best = nodes[best].h;
  result.noop = nodes[best].first_action < 0;
  result.action = result.noop ? Vec(Vec::Zero(model.spec().action_dim)) : actions[nodes[best].first_action];
  return result;
}

Vec mpc_act(const Observation& obs, envs::GoalEnv& model, const MpcConfig& cfg) {
  return mpc_search(obs, model, cfg).action;
}

DiscreteMpcPush::DiscreteMpcPush(std::unique_ptr<envs::GoalEnv> model, MpcConfig cfg)
    : model_(std::move(model)), cfg_(cfg) {
  require(model_ != nullptr, "DiscreteMpcPush: model is null");
  require(cfg_.expansions_per_step >= 1, "DiscreteMpcPush: expansions_per_step must be >= 1");
}

DiscreteMpcPush::DiscreteMpcPush(const DiscreteMpcPush& other) : model_(other.model_->clone()), cfg_(other.cfg_) {}

}  // namespace rpl::controllers
