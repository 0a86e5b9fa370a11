#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "safe_manip/ddpg.hpp"
#include "safe_manip/hgg.hpp"
#include "safe_manip/scenario.hpp"
#include "safe_manip/toml_lite.hpp"

namespace safe_manip {

struct TrainConfig {
  int iterations = 500;
  int episodes_per_iteration = 8;  // rollouts and matched targets per iteration
  int updates_per_iteration = 40;
  int bootstrap_iterations = 10;   // iterations rolled against the raw task goals
  int eval_episodes = 10;          // deterministic probe episodes per iteration
  DdpgConfig ddpg;
  HggConfig hgg;
};

// Hyperparameters from the [training] table; missing keys keep defaults,
// malformed values raise ConfigError.
TrainConfig load_train_config(const TomlTable& root);

struct IterationStats {
  int iteration = 0;
  double critic_loss = 0.0;     // means over the iteration's applied updates
  double actor_loss = 0.0;
  double rollout_return = 0.0;  // mean return against the behavior goals
  double rollout_success = 0.0;
  double probe_success = 0.0;   // greedy policy against freshly drawn task goals
  double probe_collision = 0.0;  // probe episodes with any collision tick
  int buffer_size = 0;
  int pool_size = 0;
  bool hgg_active = false;  // false while bootstrapping on raw goals
};

struct TrainResult {
  DdpgAgent agent;
  std::vector<IterationStats> curve;
};

using ProgressFn = std::function<void(const IterationStats&)>;

// Full training run: bootstrap rollouts, then per-iteration hindsight task
// matching, exploratory rollouts, replay updates, and a greedy probe.
// Deterministic for a fixed (scenario, config, seed); single-threaded.
TrainResult train(const ScenarioConfig& scenario, const TrainConfig& cfg, std::uint64_t seed,
                  const ProgressFn& progress = nullptr);

void write_curve_csv(const std::string& path, const std::vector<IterationStats>& curve);

}  // namespace safe_manip
