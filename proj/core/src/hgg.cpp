#include "safe_manip/hgg.hpp"

#include <limits>

#include "safe_manip/errors.hpp"
#include "safe_manip/hungarian.hpp"

namespace safe_manip {

void TrajectoryPool::push(Trajectory t) {
  pool_.push_back(std::move(t));
  while (static_cast<int>(pool_.size()) > capacity_) pool_.pop_front();
}

int candidate_begin(const Trajectory& traj) { return traj.states.size() > 1 ? 1 : 0; }

std::vector<double> candidate_values(const DdpgAgent& agent, const Trajectory& traj,
                                     const ScenarioConfig& scenario) {
  const int count = static_cast<int>(traj.states.size());
  if (count == 0) throw ShapeError("candidate_values: empty trajectory");
  const EnvState& s0 = traj.states.front();
  Eigen::MatrixXd obs(observation_size(scenario), count);
  for (int t = 0; t < count; ++t) obs.col(t) = observe(s0, traj.achieved(t), scenario);
  const Eigen::VectorXd values = value_batch(agent, obs);
  return std::vector<double>(values.data(), values.data() + values.size());
}

namespace {

double candidate_term(const Vec3& target_goal, const Trajectory& traj,
                      const std::vector<double>& values, const HggConfig& cfg, int t) {
  return dist(target_goal, traj.achieved(t)) -
         values[static_cast<std::size_t>(t)] / cfg.lipschitz_l;
}

void check_values(const Trajectory& traj, const std::vector<double>& values) {
  if (values.size() != traj.states.size()) {
    throw ShapeError("hgg: value table does not match trajectory length");
  }
}

}  // namespace

double hgg_weight_core(const Vec3& target_m0, const Vec3& target_goal, const Trajectory& traj,
                       const std::vector<double>& values, const HggConfig& cfg) {
  check_values(traj, values);
  double best = std::numeric_limits<double>::infinity();
  for (int t = candidate_begin(traj); t < static_cast<int>(traj.states.size()); ++t) {
    best = std::min(best, candidate_term(target_goal, traj, values, cfg, t));
  }
  return cfg.init_weight_c * dist(target_m0, state_to_goal(traj.states.front())) + best;
}

double hgg_weight(const TargetTask& target, const Trajectory& traj, const HggConfig& cfg,
                  const DdpgAgent& agent, const ScenarioConfig& scenario) {
  return hgg_weight_core(state_to_goal(target.init_state), target.goal, traj,
                         candidate_values(agent, traj, scenario), cfg);
}

int select_hindsight_index_core(const Vec3& target_goal, const Trajectory& traj,
                                const std::vector<double>& values, const HggConfig& cfg) {
  check_values(traj, values);
  int best_t = candidate_begin(traj);
  double best = candidate_term(target_goal, traj, values, cfg, best_t);
  for (int t = best_t + 1; t < static_cast<int>(traj.states.size()); ++t) {
    const double v = candidate_term(target_goal, traj, values, cfg, t);
    if (v < best) {  // strict: ties keep the earliest index
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

Vec3 select_hindsight_goal(const TargetTask& target, const Trajectory& traj, const HggConfig& cfg,
                           const DdpgAgent& agent, const ScenarioConfig& scenario) {
  const auto values = candidate_values(agent, traj, scenario);
  return traj.achieved(select_hindsight_index_core(target.goal, traj, values, cfg));
}

std::vector<TargetTask> generate_intermediate_targets(const ScenarioConfig& scenario, int count,
                                                      Rng& rng) {
  std::vector<TargetTask> targets;
  targets.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    TargetTask t;
    t.init_state.object_pos = scenario.start;
    t.init_state.object_vel = {0, 0, 0};
    t.goal = {rng.uniform(scenario.goal_x[0], scenario.goal_x[1]),
              rng.uniform(scenario.goal_y[0], scenario.goal_y[1]), scenario.goal_z};
    targets.push_back(std::move(t));
  }
  return targets;
}

std::vector<HindsightTask> match_trajectories(const std::vector<TargetTask>& targets,
                                              const TrajectoryPool& pool, const HggConfig& cfg,
                                              const DdpgAgent& agent,
                                              const ScenarioConfig& scenario) {
  const int k = static_cast<int>(targets.size());
  if (k == 0) return {};
  if (pool.size() < k) {
    throw InsufficientData("match_trajectories: pool holds " + std::to_string(pool.size()) +
                           " trajectories, need " + std::to_string(k));
  }

  std::vector<std::vector<double>> values(static_cast<std::size_t>(pool.size()));
  for (int j = 0; j < pool.size(); ++j) {
    values[static_cast<std::size_t>(j)] = candidate_values(agent, pool.at(j), scenario);
  }

  Eigen::MatrixXd weight(k, pool.size());
  for (int i = 0; i < k; ++i) {
    const Vec3 m0 = state_to_goal(targets[static_cast<std::size_t>(i)].init_state);
    for (int j = 0; j < pool.size(); ++j) {
      weight(i, j) = hgg_weight_core(m0, targets[static_cast<std::size_t>(i)].goal, pool.at(j),
                                     values[static_cast<std::size_t>(j)], cfg);
    }
  }

  const std::vector<int> assignment = solve_assignment(weight);
  std::vector<HindsightTask> tasks;
  tasks.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const int j = assignment[static_cast<std::size_t>(i)];
    const Trajectory& traj = pool.at(j);
    HindsightTask task;
    task.init_state_ref = traj.states.front();
    task.goal = traj.achieved(select_hindsight_index_core(
        targets[static_cast<std::size_t>(i)].goal, traj, values[static_cast<std::size_t>(j)],
        cfg));
    task.source_target = i;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

void relabel_and_store(ReplayBuffer& buffer, const Trajectory& traj,
                       const ScenarioConfig& scenario, const HggConfig& cfg, Rng& rng) {
  const int horizon = traj.horizon();
  if (horizon <= 0) return;
  if (traj.states.size() != static_cast<std::size_t>(horizon) + 1 ||
      traj.rewards.size() != static_cast<std::size_t>(horizon) ||
      traj.collided.size() != static_cast<std::size_t>(horizon)) {
    throw ShapeError("relabel_and_store: inconsistent trajectory record lengths");
  }

  for (int t = 0; t < horizon; ++t) {
    const EnvState& s = traj.states[static_cast<std::size_t>(t)];
    const EnvState& s_next = traj.states[static_cast<std::size_t>(t) + 1];
    const bool coll = traj.collided[static_cast<std::size_t>(t)];

    Transition original;
    original.obs = observe(s, traj.goal, scenario);
    original.action = traj.actions[static_cast<std::size_t>(t)];
    original.reward = traj.rewards[static_cast<std::size_t>(t)];
    original.next_obs = observe(s_next, traj.goal, scenario);
    original.collided = coll;
    buffer.push(std::move(original));

    auto push_relabel = [&](const Vec3& substitute) {
      Transition r;
      r.obs = observe(s, substitute, scenario);
      r.action = traj.actions[static_cast<std::size_t>(t)];
      r.reward = reward_of(coll, s_next.object_pos, substitute, scenario);
      r.next_obs = observe(s_next, substitute, scenario);
      r.collided = coll;
      buffer.push(std::move(r));
    };

    if (cfg.her == HggConfig::Her::kFinal) {
      push_relabel(traj.achieved(horizon));
    } else {
      for (int d = 0; d < cfg.her_k; ++d) {
        const int idx = static_cast<int>(rng.uniform_int(t + 1, horizon));
        push_relabel(traj.achieved(idx));
      }
    }
  }
}

}  // namespace safe_manip
