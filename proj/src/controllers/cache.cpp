#include "rpl/controllers/cache.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "rpl/common/error.hpp"
#include "rpl/common/random.hpp"

namespace rpl::controllers {

ControllerCache compile_cache(Controller& teacher, envs::GoalEnv& env, std::size_t capacity, std::uint64_t seed) {
  require(capacity >= 1, "compile_cache: capacity must be >= 1");
  ControllerCache cache;
  cache.capacity = capacity;
  for (std::uint64_t episode = 0; cache.size() < capacity; ++episode) {
    Observation obs = env.reset(derive_seed(seed, episode));
    for (int t = 0; t < env.spec().horizon && cache.size() < capacity; ++t) {
      Vec action = envs::clip_action(teacher.act(obs));
      cache.states.push_back(obs.state);
      cache.actions.push_back(action);
      obs = env.step(action).observation;
    }
  }
  return cache;
}

std::size_t cache_lookup(const Vec& state, const ControllerCache& cache) {
  require(!cache.states.empty(), "cache_act: cache is empty");
  require(state.size() == cache.states.front().size(), "cache_act: state dimension does not match the cache");
  std::size_t best = 0;
  double best_d = (cache.states[0] - state).squaredNorm();
  for (std::size_t i = 1; i < cache.states.size(); ++i) {
    const double d = (cache.states[i] - state).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Vec cache_act(const Observation& obs, const ControllerCache& cache) {
  return cache.actions[cache_lookup(obs.state, cache)];
}

void save_cache(const ControllerCache& cache, std::ostream& os) {
  require(!cache.states.empty(), "save_cache: cache is empty");
  const auto precision = os.precision(17);
  os << "RPLCACHE v1 " << cache.states.front().size() << ' ' << cache.actions.front().size() << ' ' << cache.size()
     << '\n';
  for (std::size_t i = 0; i < cache.size(); ++i) {
    bool first = true;
    for (const Vec* v : {&cache.states[i], &cache.actions[i]}) {
      for (Eigen::Index k = 0; k < v->size(); ++k) {
        os << (first ? "" : "\t") << (*v)(k);
        first = false;
      }
    }
    os << '\n';
  }
  os.precision(precision);
}

ControllerCache load_cache(std::istream& is) {
  std::string magic, version;
  long long sd = 0, ad = 0, count = 0;
  if (!(is >> magic >> version >> sd >> ad >> count) || magic != "RPLCACHE" || version != "v1")
    throw ConfigError("load_cache: missing RPLCACHE v1 header");
  if (sd < 1 || ad < 1 || count < 1) throw ConfigError("load_cache: bad dimensions in header");
  ControllerCache cache;
  cache.capacity = static_cast<std::size_t>(count);
  for (long long i = 0; i < count; ++i) {
    Vec s(sd), a(ad);
    for (long long k = 0; k < sd; ++k)
      if (!(is >> s(k))) throw ConfigError("load_cache: truncated entry " + std::to_string(i));
    for (long long k = 0; k < ad; ++k)
      if (!(is >> a(k))) throw ConfigError("load_cache: truncated entry " + std::to_string(i));
    cache.states.push_back(std::move(s));
    cache.actions.push_back(std::move(a));
  }
  return cache;
}

void save_cache_file(const ControllerCache& cache, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write cache file '" + path + "'");
  save_cache(cache, os);
}

ControllerCache load_cache_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open cache file '" + path + "'");
  return load_cache(is);
}

CachedController::CachedController(ControllerCache cache, std::string teacher)
    : cache_(std::move(cache)), teacher_(std::move(teacher)) {
  require(!cache_.states.empty(), "CachedController: cache is empty");
}

}  // namespace rpl::controllers
