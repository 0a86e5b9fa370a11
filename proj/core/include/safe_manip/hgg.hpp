#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "safe_manip/ddpg.hpp"
#include "safe_manip/env.hpp"

namespace safe_manip {

struct HggConfig {
  int k_targets = 16;          // target tasks drawn per iteration
  int m_episodes = 16;         // episodes rolled per iteration
  double lipschitz_l = 5.0;    // L in the value term
  double init_weight_c = 3.0;  // c on the initial-state distance term
  int pool_size = 100;         // recent trajectories kept for matching
  enum class Her { kFinal, kFuture } her = Her::kFuture;
  int her_k = 4;               // relabels per transition for the future strategy
};

// One rolled episode: states s_0..s_T plus the per-step records. The
// achieved goal of state t is its object position.
struct Trajectory {
  std::vector<EnvState> states;
  std::vector<Vec3> actions;
  std::vector<double> rewards;
  std::vector<bool> collided;
  Vec3 goal;  // behavior goal the episode was rolled against

  int horizon() const { return static_cast<int>(actions.size()); }
  Vec3 achieved(int t) const { return states[static_cast<std::size_t>(t)].object_pos; }
};

// A target task drawn from the task distribution: fixed start pose, goal
// uniform over the goal region.
struct TargetTask {
  EnvState init_state;
  Vec3 goal;
};

// An intermediate task selected by matching: a hindsight goal lifted from a
// pool trajectory, traceable to the target it serves.
struct HindsightTask {
  EnvState init_state_ref;  // initial state of the matched trajectory
  Vec3 goal;
  int source_target = -1;
};

class TrajectoryPool {
 public:
  explicit TrajectoryPool(int capacity) : capacity_(capacity) {}
  void push(Trajectory t);
  int size() const { return static_cast<int>(pool_.size()); }
  const Trajectory& at(int i) const { return pool_[static_cast<std::size_t>(i)]; }

 private:
  int capacity_;
  std::deque<Trajectory> pool_;
};

// Candidate achieved-goal index range over a trajectory: t = 1..T, falling
// back to the single state for degenerate one-state trajectories.
int candidate_begin(const Trajectory& traj);

// values[t] must hold the clipped value estimate of (trajectory initial
// state, achieved goal of state t) for every state; computed once per
// trajectory and shared across targets.
std::vector<double> candidate_values(const DdpgAgent& agent, const Trajectory& traj,
                                     const ScenarioConfig& scenario);

// Matching weight: c * |m(target start) - m(traj start)| plus the best
// candidate term min_t (|target goal - m(s_t)| - value / L).
double hgg_weight_core(const Vec3& target_m0, const Vec3& target_goal, const Trajectory& traj,
                       const std::vector<double>& values, const HggConfig& cfg);
double hgg_weight(const TargetTask& target, const Trajectory& traj, const HggConfig& cfg,
                  const DdpgAgent& agent, const ScenarioConfig& scenario);

// Index/goal minimizing the candidate term; ties break to the earliest t.
int select_hindsight_index_core(const Vec3& target_goal, const Trajectory& traj,
                                const std::vector<double>& values, const HggConfig& cfg);
Vec3 select_hindsight_goal(const TargetTask& target, const Trajectory& traj, const HggConfig& cfg,
                           const DdpgAgent& agent, const ScenarioConfig& scenario);

// K target tasks from the task distribution.
std::vector<TargetTask> generate_intermediate_targets(const ScenarioConfig& scenario, int count,
                                                      Rng& rng);

// Weighted bipartite matching of targets onto distinct pool trajectories;
// each matched pair yields the hindsight task for next iteration's rollout.
// Throws InsufficientData when the pool holds fewer trajectories than
// targets.
std::vector<HindsightTask> match_trajectories(const std::vector<TargetTask>& targets,
                                              const TrajectoryPool& pool, const HggConfig& cfg,
                                              const DdpgAgent& agent,
                                              const ScenarioConfig& scenario);

// Stores the trajectory's transitions plus relabeled copies per the HER
// strategy; relabeled rewards are recomputed against the substitute goal,
// with collisions keeping eta under any goal.
void relabel_and_store(ReplayBuffer& buffer, const Trajectory& traj,
                       const ScenarioConfig& scenario, const HggConfig& cfg, Rng& rng);

}  // namespace safe_manip
