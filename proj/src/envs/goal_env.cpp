#include "rpl/envs/goal_env.hpp"

#include <iomanip>
#include <ostream>

#include "rpl/common/error.hpp"

namespace rpl::envs {

bool GoalEnv::is_success(const Observation&, double final_reward) const { return episode_success(final_reward); }

bool GoalEnv::restore(const Observation&) { return false; }

bool episode_success(double final_reward) { return final_reward == 1.0; }

double sparse_goal_reward(const Vec& achieved, const Vec& desired, double radius) {
  require(achieved.size() == desired.size(), "compute_reward: goal lengths differ");
  return (achieved - desired).norm() < radius ? 1.0 : 0.0;
}

Vec clip_action(const Vec& action) { return action.cwiseMax(-1.0).cwiseMin(1.0); }

namespace {

void write_vec(std::ostream& os, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
}

}  // namespace

void write_trajectory(const Trajectory& trajectory, std::ostream& os) {
  const auto precision = os.precision(17);
  for (const TrajectoryStep& s : trajectory) {
    os << s.step << '\t';
    write_vec(os, s.state);
    os << '\t';
    write_vec(os, s.action);
    os << '\t' << s.reward << '\t';
    write_vec(os, s.achieved_goal);
    os << '\t';
    write_vec(os, s.desired_goal);
    os << '\n';
  }
  os.precision(precision);
}

}  // namespace rpl::envs
