#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "safe_manip/controller.hpp"
#include "safe_manip/hgg.hpp"

namespace safe_manip {

// One evaluated episode. Collisions are counted as events (rising edges of
// the per-tick overlap flag); success is judged at the final state.
struct RolloutRecord {
  Trajectory traj;
  std::vector<ControlDiag> diags;  // one per step for the MPC controllers
  std::uint64_t env_seed = 0;
  int collisions = 0;
  bool success = false;
  int first_success_step = -1;  // -1: never within the success radius
  double total_reward = 0.0;
  long feasible_steps = 0;
  long feasible_collisions = 0;  // steps the solver called feasible that still collided
};

RolloutRecord run_controller_episode(const ScenarioConfig& scenario, ControllerKind kind,
                                     const DdpgAgent* agent, const MpcProblem& problem,
                                     std::uint64_t env_seed);

// Aggregate safety counters across an evaluation.
struct SafetyStats {
  long total_steps = 0;
  long feasible_steps = 0;
  long feasible_collisions = 0;
  long episodes_with_collision = 0;
};

struct ToleranceStat {
  double rate = 0.0;
  double ci_lo = 0.0;  // Wilson 95% interval
  double ci_hi = 0.0;
};

struct EvalReport {
  std::string scenario;
  std::string controller;
  int episodes = 0;
  std::uint64_t seed = 0;
  bool has_rates = false;  // false when episodes == 0: rates are absent
  std::array<ToleranceStat, 3> tolerance;  // success under 0, 1, 2 allowed collisions
  double reach_rate = 0.0;  // success ignoring collisions
  std::map<int, long> collision_histogram;  // collision events -> episode count
  double mean_episode_length = 0.0;
  double median_collisions = 0.0;

  std::string to_json() const;  // byte-stable given identical contents
  std::string to_table() const;
};

// Number of eval workers: explicit request, else SAFE_MANIP_THREADS, else
// hardware concurrency; always capped by the episode count.
int resolve_thread_count(int requested, int episodes);

// Seeded evaluation over per-episode derived seeds; aggregation is
// order-independent so the report does not depend on the worker count.
// keep, when non-null, receives every episode record in episode order.
EvalReport evaluate(const ScenarioConfig& scenario, ControllerKind kind, const DdpgAgent* agent,
                    const MpcProblem& problem, int episodes, std::uint64_t seed, int threads = 0,
                    SafetyStats* safety = nullptr, std::vector<RolloutRecord>* keep = nullptr);

}  // namespace safe_manip
