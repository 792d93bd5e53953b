#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "generators.hpp"
#include "rpl/common/error.hpp"
#include "rpl/controllers/arm_teacher.hpp"
#include "rpl/controllers/cache.hpp"
#include "rpl/controllers/mpc.hpp"
#include "rpl/controllers/reactive.hpp"
#include "rpl/envs/hook_world.hpp"
#include "rpl/envs/push_world.hpp"
#include "rpl/envs/tasks.hpp"

using namespace rpl;
using namespace rpl::controllers;
namespace L = rpl::envs::layout;

namespace {

std::unique_ptr<envs::GoalEnv> task(const std::string& name) {
  envs::TaskConfig c;
  c.name = name;
  return envs::make_env(c);
}

Observation push_obs(const Vec3& gripper, const Vec3& object, const Vec3& goal, double fingers = 0.0) {
  Observation obs;
  obs.state = Vec::Zero(L::kPushStateDim);
  obs.state.segment<3>(L::kGripperPos) = gripper;
  obs.state.segment<3>(L::kObjectPos) = object;
  obs.state.segment<3>(L::kObjectRel) = object - gripper;
  obs.state(L::kFingerWidth) = fingers;
  obs.achieved_goal = object;
  obs.desired_goal = goal;
  return obs;
}

double success_rate(envs::GoalEnv& env, Controller& c, int episodes, std::uint64_t seed0) {
  int wins = 0;
  for (int e = 0; e < episodes; ++e) {
    Observation obs = env.reset(seed0 + static_cast<std::uint64_t>(e));
    envs::StepResult last;
    for (int t = 0; t < env.spec().horizon; ++t) last = env.step(c.act(obs)), obs = last.observation;
    wins += env.is_success(last.observation, last.reward) ? 1 : 0;
  }
  return static_cast<double>(wins) / episodes;
}

void check(const Vec& got, std::initializer_list<double> want) {
  REQUIRE(got.size() == static_cast<Eigen::Index>(want.size()));
  int i = 0;
  for (double w : want) CHECK(got(i++) == doctest::Approx(w).epsilon(1e-12));
}

}  // namespace

TEST_CASE("push location lies behind the object on the goal line") {
  Vec o(2), g(2);
  o << 0.5, 0.5;
  g << 0.6, 0.5;
  const Vec pl = push_location(o, g, 0.04);
  CHECK(pl(0) == doctest::Approx(0.46));
  CHECK(pl(1) == doctest::Approx(0.5));
  CHECK(push_location(o, o, 0.04) == o);
}

TEST_CASE("push location property: collinear, radius away, beyond the object") {
  Rng r(11);
  for (int i = 0; i < 500; ++i) {
    const Vec o = testgen::vec(r, 3);
    const Vec g = testgen::vec(r, 3);
    const double radius = r.uniform(0.0, 0.2);
    if ((o - g).norm() < 1e-6) continue;
    const Vec pl = push_location(o, g, radius);
    CHECK((pl - o).norm() == doctest::Approx(radius).epsilon(1e-9));
    CHECK((pl - g).norm() == doctest::Approx((o - g).norm() + radius).epsilon(1e-9));
    const Vec u = (o - g).normalized();
    const Vec d = pl - o;
    CHECK((d - d.dot(u) * u).norm() < 1e-12);
  }
}

TEST_CASE("reactive push follows its rule cascade") {
  ReactiveParams p;
  const Vec3 object(0.5, 0.5, 0.025), goal(0.6, 0.5, 0.025);
  const double plx = 0.5 - p.push_offset;
  int rule = -1;

  check(reactive_push(push_obs({0.5, 0.3, 0.1}, object, goal), p, &rule), {5 * (plx - 0.5), 1.0, 0.0, 0.0});
  CHECK(rule == push_rule::kApproach);

  check(reactive_push(push_obs({plx, 0.5, 0.1}, object, goal), p, &rule), {0.0, 0.0, -0.375, 0.0});
  CHECK(rule == push_rule::kDescend);

  check(reactive_push(push_obs({plx, 0.5, 0.025}, object, goal), p, &rule), {0.5, 0.0, 0.0, 0.0});
  CHECK(rule == push_rule::kPush);

  check(reactive_push(push_obs({0.2, 0.2, 0.1}, goal + Vec3(0.005, 0, 0), goal), p, &rule), {0, 0, 0, 0});
  CHECK(rule == push_rule::kAtTarget);

  // Low and away from the push location: rise before travelling.
  check(reactive_push(push_obs({0.5, 0.3, 0.02}, object, goal), p, &rule), {0.0, 0.0, 0.4, 0.0});
  CHECK(rule == push_rule::kApproach);
}

TEST_CASE("reactive push gain and miscalibration scale the action") {
  ReactiveParams p;
  p.miscalibration_multiplier = 0.5;
  const Vec3 object(0.5, 0.5, 0.025), goal(0.6, 0.5, 0.025);
  const Vec a = reactive_push(push_obs({0.5 - p.push_offset, 0.5, 0.025}, object, goal), p);
  CHECK(a(0) == doctest::Approx(0.25));
}

TEST_CASE("reactive pick and place carries, closes and opens") {
  ReactiveParams p;
  int rule = -1;
  const Vec3 object(0.5, 0.5, 0.025);
  // Held object, goal 0.1 m straight above: lift with the fingers kept closed.
  check(reactive_pick_and_place(push_obs(object, object, object + Vec3(0, 0, 0.1), 0.05), p, &rule),
        {0.0, 0.0, 0.5, 1.0});
  CHECK(rule == pick_rule::kCarry);

  check(reactive_pick_and_place(push_obs(object, object, object + Vec3(0, 0, 0.1), 0.08), p, &rule),
        {0.0, 0.0, 0.0, 1.0});
  CHECK(rule == pick_rule::kClose);

  // Above the object with the fingers too narrow to pass it.
  check(reactive_pick_and_place(push_obs(object + Vec3(0, 0, 0.1), object, {0.6, 0.6, 0.1}, 0.0), p, &rule),
        {0.0, 0.0, 0.0, -1.0});
  CHECK(rule == pick_rule::kOpen);

  check(reactive_pick_and_place(push_obs(object + Vec3(0, 0, 0.1), object, {0.6, 0.6, 0.1}, 0.08), p, &rule),
        {0.0, 0.0, -0.5, 0.0});
  CHECK(rule == pick_rule::kDescend);
}

TEST_CASE("scripted controllers solve their noiseless tasks") {
  auto push = task("push");
  ReactivePush rp;
  CHECK(success_rate(*push, rp, 40, 100) >= 0.9);

  auto pnp = task("pick_and_place");
  ReactivePickAndPlace rpp;
  CHECK(success_rate(*pnp, rpp, 40, 100) >= 0.9);
}

TEST_CASE("reactive hook sweeps toward the goal") {
  envs::HookWorld world(envs::hook_task_config());
  const HookParams hp = hook_params_for(world);
  const envs::HookGeometry& G = hp.geometry;

  const Vec3 object(0.45, 0.65, 0.5 * G.object_height);
  const Vec3 goal(0.45, 0.45, 0.5 * G.object_height);
  const double reach = G.object_radius + G.hook_radius;
  const Vec3 hook(object.x() + reach + hp.clearance, object.y() + reach + hp.clearance - G.shaft_length,
                  G.hook_rest_z + hp.sweep_lift);
  Observation obs;
  obs.state = Vec::Zero(L::kHookStateDim);
  obs.state.segment<3>(L::kGripperPos) = hook;
  obs.state.segment<3>(L::kObjectPos) = object;
  obs.state.segment<3>(L::kHookPos) = hook;
  obs.state(L::kFingerWidth) = G.handle_width;
  obs.achieved_goal = object;
  obs.desired_goal = goal;

  int rule = -1;
  const Vec a = reactive_hook(obs, hp, &rule);
  CHECK(rule == hook_rule::kSweep);
  CHECK(a(1) < 0.0);
  CHECK(a(0) == doctest::Approx(0.0));
  CHECK(a(3) == 1.0);
}

TEST_CASE("reactive hook succeeds on the noiseless hook task") {
  auto env = task("hook");
  auto* world = dynamic_cast<envs::HookWorld*>(env.get());
  REQUIRE(world != nullptr);
  ReactiveHook rh(hook_params_for(*world));
  CHECK(success_rate(*env, rh, 100, 0) >= 0.95);
}

TEST_CASE("arm teacher moves the cylinder toward the goal") {
  auto env = task("dense_arm");
  ArmPushTeacher teacher;
  double start = 0, end = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Observation obs = env->reset(s);
    start += (obs.achieved_goal - obs.desired_goal).norm();
    for (int t = 0; t < env->spec().horizon; ++t) {
      const Vec a = teacher.act(obs);
      REQUIRE(a.size() == 3);
      CHECK(a.cwiseAbs().maxCoeff() <= 1.0);
      obs = env->step(a).observation;
    }
    end += (obs.achieved_goal - obs.desired_goal).norm();
  }
  CHECK(end < 0.5 * start);
}

TEST_CASE("mpc heuristic ordering") {
  CHECK(heuristic_less({0.1, 5.0}, {0.2, 0.0}, 1e-9));
  CHECK(heuristic_less({0.1, 0.1}, {0.1 + 1e-12, 0.2}, 1e-9));
  CHECK_FALSE(heuristic_less({0.1, 0.2}, {0.1, 0.2}, 1e-9));
  const auto moves = cardinal_actions(4);
  CHECK(moves.size() == 6);
  for (const Vec& m : moves) CHECK(m.cwiseAbs().sum() == 1.0);
  CHECK_THROWS_AS(cardinal_actions(2), ContractError);
}

TEST_CASE("mpc returns the zero action when the object is on the goal") {
  auto env = task("push");
  Observation obs = env->reset(3);
  obs.state.segment<3>(L::kObjectPos) = obs.desired_goal;
  obs.state.segment<3>(L::kObjectRel) = obs.desired_goal - obs.state.segment<3>(L::kGripperPos);
  obs.achieved_goal = obs.desired_goal;
  auto model = env->clone();
  const MpcResult r = mpc_search(obs, *model, MpcConfig{});
  CHECK(r.noop);
  CHECK(r.action.isZero());
}

TEST_CASE("mpc with one expansion returns a child move or noop") {
  auto env = task("push");
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Observation obs = env->reset(s);
    auto model = env->clone();
    MpcConfig cfg;
    cfg.expansions_per_step = 1;
    const MpcResult r = mpc_search(obs, *model, cfg);
    CHECK(r.expansions == 1);
    CHECK(r.model_steps == 6);
    CHECK((r.noop || r.action.cwiseAbs().sum() == 1.0));
  }
  MpcConfig bad;
  bad.expansions_per_step = 0;
  auto model = env->clone();
  CHECK_THROWS_AS(mpc_search(env->reset(0), *model, bad), ContractError);
}

TEST_CASE("mpc leaves the real environment untouched and respects its step budget") {
  auto env = task("push");
  const Observation obs = env->reset(4);
  const std::uint64_t before = env->step_calls();
  auto model = env->clone();
  MpcConfig cfg;
  const MpcResult r = mpc_search(obs, *model, cfg);
  CHECK(env->step_calls() == before);
  CHECK(r.expansions <= cfg.expansions_per_step);
  CHECK(r.model_steps <= 6 * cfg.expansions_per_step);
}

TEST_CASE("mpc with an exhausted tree matches brute force") {
  auto env = task("push");
  const int H = env->spec().horizon;
  const auto moves = cardinal_actions(4);
  for (std::uint64_t s = 0; s < 5; ++s) {
    env->reset(s);
    // Walk toward the object so that some short sequences make contact.
    ReactivePush rp;
    Observation obs = env->observe();
    for (int t = 0; t < 12; ++t) obs = env->step(rp.act(obs)).observation;
    obs.step_index = H - 2;
    REQUIRE(env->restore(obs));

    MpcHeuristic best = mpc_heuristic(obs, MpcConfig{}.object_radius);
    for (const Vec& a : moves) {
      for (const Vec& b : moves) {
        auto sim = env->clone();
        const auto h1 = mpc_heuristic(sim->step(a).observation, MpcConfig{}.object_radius);
        if (heuristic_less(h1, best, 1e-9)) best = h1;
        const auto h2 = mpc_heuristic(sim->step(b).observation, MpcConfig{}.object_radius);
        if (heuristic_less(h2, best, 1e-9)) best = h2;
      }
    }
    auto model = env->clone();
    MpcConfig cfg;
    cfg.expansions_per_step = 100;
    const MpcResult r = mpc_search(obs, *model, cfg);
    CHECK_FALSE(heuristic_less(best, r.best, 1e-9));
    CHECK_FALSE(heuristic_less(r.best, best, 1e-9));
  }
}

TEST_CASE("mpc push controller makes progress on push") {
  auto env = task("push");
  DiscreteMpcPush mpc(env->clone());
  auto copy = mpc.clone();
  CHECK(&dynamic_cast<DiscreteMpcPush&>(*copy).model() != &mpc.model());
  CHECK(success_rate(*env, mpc, 5, 0) >= 0.4);
}

TEST_CASE("compiled cache records teacher rollouts") {
  auto env = task("push");
  ReactivePush teacher;
  const ControllerCache cache = compile_cache(teacher, *env, 120, 9);
  REQUIRE(cache.size() == 120);
  const Observation first = env->reset(derive_seed(9, 0));
  CHECK(cache.states[0] == first.state);
  CHECK(cache.actions[0] == envs::clip_action(ReactivePush().act(first)));
  CHECK(compile_cache(teacher, *env, 120, 9) == cache);
  CHECK_THROWS_AS(compile_cache(teacher, *env, 0, 9), ContractError);
}

TEST_CASE("cache lookup matches a sorted linear scan") {
  Rng r(5);
  ControllerCache cache;
  for (int i = 0; i < 64; ++i) {
    cache.states.push_back(testgen::vec(r, 6));
    cache.actions.push_back(testgen::vec(r, 4));
  }
  for (int q = 0; q < 200; ++q) {
    const Vec x = testgen::vec(r, 6);
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < cache.size(); ++i) order.emplace_back((cache.states[i] - x).norm(), i);
    std::sort(order.begin(), order.end());
    CHECK(cache_lookup(x, cache) == order.front().second);
  }
}

TEST_CASE("cache ties go to the lowest index and bad queries are rejected") {
  ControllerCache cache;
  Vec a(2), b(2), act(1);
  a << 0.0, 0.0;
  b << 1.0, 0.0;
  for (const Vec* s : {&b, &a, &b, &a}) {
    cache.states.push_back(*s);
    act(0) = static_cast<double>(cache.size());
    cache.actions.push_back(act);
  }
  CHECK(cache_lookup(a, cache) == 1);
  CHECK(cache_lookup(b, cache) == 0);
  Vec mid(2);
  mid << 0.5, 0.0;
  CHECK(cache_lookup(mid, cache) == 0);
  CHECK_THROWS_AS(cache_lookup(Vec::Zero(3), cache), ContractError);
  CHECK_THROWS_AS(cache_lookup(a, ControllerCache{}), ContractError);
}

TEST_CASE("cache save and load round trip exactly") {
  auto env = task("push");
  ReactivePush teacher;
  const ControllerCache cache = compile_cache(teacher, *env, 75, 2);
  std::stringstream ss;
  save_cache(cache, ss);
  const ControllerCache back = load_cache(ss);
  CHECK(back == cache);
  std::stringstream junk("not a cache");
  CHECK_THROWS(load_cache(junk));

  CachedController cc(cache, "reactive_push");
  CHECK(cc.name() == "cached_reactive_push");
  CHECK(cc.act(env->reset(derive_seed(2, 0))) == cache.actions[0]);
}
