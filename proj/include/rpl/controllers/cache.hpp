#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rpl/controllers/controller.hpp"

namespace rpl::controllers {

struct ControllerCache {
  std::vector<Vec> states;
  std::vector<Vec> actions;
  std::size_t capacity = 500;

  std::size_t size() const { return states.size(); }
  bool operator==(const ControllerCache& o) const {
    return states == o.states && actions == o.actions;
  }
};

// Rolls the teacher out on-policy (episode k reset with derive_seed(seed, k))
// and records (state, action) pairs until `capacity` entries are stored.
ControllerCache compile_cache(Controller& teacher, envs::GoalEnv& env, std::size_t capacity, std::uint64_t seed);

// Index of the nearest stored state (Euclidean); ties go to the lowest index.
std::size_t cache_lookup(const Vec& state, const ControllerCache& cache);
Vec cache_act(const Observation& obs, const ControllerCache& cache);

// Text format: header `RPLCACHE v1 <state_dim> <action_dim> <count>`, then one
// line per entry with the state and action components tab-separated.
void save_cache(const ControllerCache& cache, std::ostream& os);
ControllerCache load_cache(std::istream& is);
void save_cache_file(const ControllerCache& cache, const std::string& path);
ControllerCache load_cache_file(const std::string& path);

class CachedController : public Controller {
 public:
  explicit CachedController(ControllerCache cache, std::string teacher = "teacher");
  std::string name() const override { return "cached_" + teacher_; }
  int action_dim() const override { return static_cast<int>(cache_.actions.front().size()); }
  Vec act(const Observation& obs) override { return cache_act(obs, cache_); }
  std::unique_ptr<Controller> clone() const override { return std::make_unique<CachedController>(*this); }
  const ControllerCache& cache() const { return cache_; }

 private:
  ControllerCache cache_;
  std::string teacher_;
};

}  // namespace rpl::controllers
