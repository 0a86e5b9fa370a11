#include "safe_manip/train.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "safe_manip/errors.hpp"

namespace safe_manip {

namespace {

// Stream keys; mixed with the run seed so every random draw has one owner.
constexpr std::uint64_t kAgentStream = 0xA6E2;
constexpr std::uint64_t kTaskStream = 0x7A5C;
constexpr std::uint64_t kEnvStream = 0xE11E;
constexpr std::uint64_t kNoiseStream = 0x9015;
constexpr std::uint64_t kHerStream = 0x4E12;
constexpr std::uint64_t kUpdateStream = 0x50D4;
constexpr std::uint64_t kProbeStream = 0xBEE5;

int positive_int(const TomlTable& t, const std::string& key, int fallback) {
  const double v = t.number_or(key, fallback);
  if (v < 1 || v != std::floor(v)) throw ConfigError("training." + key + " must be a positive integer");
  return static_cast<int>(v);
}

int nonneg_int(const TomlTable& t, const std::string& key, int fallback) {
  const double v = t.number_or(key, fallback);
  if (v < 0 || v != std::floor(v)) {
    throw ConfigError("training." + key + " must be a non-negative integer");
  }
  return static_cast<int>(v);
}

}  // namespace

TrainConfig load_train_config(const TomlTable& root) {
  TrainConfig cfg;
  const TomlTable* t = root.table("training");
  if (t == nullptr) return cfg;

  cfg.iterations = positive_int(*t, "iterations", cfg.iterations);
  cfg.episodes_per_iteration = positive_int(*t, "episodes_per_iteration", cfg.episodes_per_iteration);
  cfg.updates_per_iteration = nonneg_int(*t, "updates_per_iteration", cfg.updates_per_iteration);
  cfg.bootstrap_iterations = nonneg_int(*t, "bootstrap_iterations", cfg.bootstrap_iterations);
  cfg.eval_episodes = nonneg_int(*t, "eval_episodes", cfg.eval_episodes);

  cfg.ddpg.gamma = t->number_or("gamma", cfg.ddpg.gamma);
  if (cfg.ddpg.gamma <= 0.0 || cfg.ddpg.gamma >= 1.0) {
    throw ConfigError("training.gamma must lie in (0, 1)");
  }
  cfg.ddpg.tau = t->number_or("tau", cfg.ddpg.tau);
  if (cfg.ddpg.tau <= 0.0 || cfg.ddpg.tau > 1.0) throw ConfigError("training.tau must lie in (0, 1]");
  cfg.ddpg.actor_lr = t->number_or("actor_lr", cfg.ddpg.actor_lr);
  cfg.ddpg.critic_lr = t->number_or("critic_lr", cfg.ddpg.critic_lr);
  if (cfg.ddpg.actor_lr <= 0.0 || cfg.ddpg.critic_lr <= 0.0) {
    throw ConfigError("training learning rates must be positive");
  }
  cfg.ddpg.noise_sigma = t->number_or("noise_sigma", cfg.ddpg.noise_sigma);
  if (cfg.ddpg.noise_sigma < 0.0) throw ConfigError("training.noise_sigma must be non-negative");
  cfg.ddpg.batch_size = positive_int(*t, "batch_size", cfg.ddpg.batch_size);
  cfg.ddpg.buffer_capacity =
      static_cast<std::size_t>(positive_int(*t, "buffer_capacity",
                                            static_cast<int>(cfg.ddpg.buffer_capacity)));
  if (cfg.ddpg.buffer_capacity < static_cast<std::size_t>(cfg.ddpg.batch_size)) {
    throw ConfigError("training.buffer_capacity must be at least the batch size");
  }
  if (t->has("hidden")) {
    cfg.ddpg.hidden.clear();
    for (double h : t->number_array("hidden")) {
      if (h < 1 || h != std::floor(h)) throw ConfigError("training.hidden must hold positive integers");
      cfg.ddpg.hidden.push_back(static_cast<int>(h));
    }
    if (cfg.ddpg.hidden.empty()) throw ConfigError("training.hidden must not be empty");
  }

  cfg.hgg.lipschitz_l = t->number_or("lipschitz_l", cfg.hgg.lipschitz_l);
  if (cfg.hgg.lipschitz_l <= 0.0) throw ConfigError("training.lipschitz_l must be positive");
  cfg.hgg.init_weight_c = t->number_or("init_weight_c", cfg.hgg.init_weight_c);
  if (cfg.hgg.init_weight_c < 0.0) throw ConfigError("training.init_weight_c must be non-negative");
  cfg.hgg.pool_size = positive_int(*t, "pool_size", cfg.hgg.pool_size);
  cfg.hgg.her_k = positive_int(*t, "her_k", cfg.hgg.her_k);
  const std::string her = t->str_or("her", "future");
  if (her == "future") {
    cfg.hgg.her = HggConfig::Her::kFuture;
  } else if (her == "final") {
    cfg.hgg.her = HggConfig::Her::kFinal;
  } else {
    throw ConfigError("training.her must be 'future' or 'final'");
  }

  cfg.hgg.k_targets = cfg.episodes_per_iteration;
  cfg.hgg.m_episodes = cfg.episodes_per_iteration;
  if (cfg.hgg.pool_size < cfg.episodes_per_iteration) {
    throw ConfigError("training.pool_size must cover one iteration of episodes");
  }
  return cfg;
}

TrainResult train(const ScenarioConfig& scenario, const TrainConfig& cfg, std::uint64_t seed,
                  const ProgressFn& progress) {
  HggConfig hgg = cfg.hgg;
  hgg.k_targets = cfg.episodes_per_iteration;
  hgg.m_episodes = cfg.episodes_per_iteration;

  TrainResult result{make_agent(scenario, cfg.ddpg, Rng::mix_seed(seed, kAgentStream)), {}};
  DdpgAgent& agent = result.agent;
  ReplayBuffer buffer(cfg.ddpg.buffer_capacity);
  TrajectoryPool pool(hgg.pool_size);
  const int per_iter = cfg.episodes_per_iteration;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    std::vector<HindsightTask> tasks;
    const bool hgg_active = iter >= cfg.bootstrap_iterations && pool.size() >= per_iter;
    if (hgg_active) {
      Rng task_rng(Rng::mix_seed(seed, kTaskStream, static_cast<std::uint64_t>(iter)));
      const std::vector<TargetTask> targets =
          generate_intermediate_targets(scenario, per_iter, task_rng);
      tasks = match_trajectories(targets, pool, hgg, agent, scenario);
    }

    double return_sum = 0.0;
    double success_sum = 0.0;
    for (int ep = 0; ep < per_iter; ++ep) {
      const std::uint64_t idx = static_cast<std::uint64_t>(iter) * per_iter + ep;
      const ResetResult init = reset(scenario, Rng::mix_seed(seed, kEnvStream, idx));
      Rng noise_rng(Rng::mix_seed(seed, kNoiseStream, idx));
      const Vec3 behavior_goal = hgg_active ? tasks[static_cast<std::size_t>(ep)].goal : init.goal;

      Trajectory traj;
      traj.goal = behavior_goal;
      traj.states.push_back(init.state);
      EnvState state = init.state;
      for (int t = 0; t < scenario.episode_len; ++t) {
        const Vec3 action =
            select_action(agent, observe(state, behavior_goal, scenario), true, noise_rng);
        const StepResult sr = step(scenario, state, action, behavior_goal);
        traj.actions.push_back(action);
        traj.rewards.push_back(sr.reward);
        traj.collided.push_back(sr.collided);
        return_sum += sr.reward;
        state = sr.next;
        traj.states.push_back(state);
      }
      if (is_success(state.object_pos, behavior_goal, scenario.success_radius)) success_sum += 1.0;

      Rng her_rng(Rng::mix_seed(seed, kHerStream, idx));
      relabel_and_store(buffer, traj, scenario, hgg, her_rng);
      pool.push(std::move(traj));
    }

    Rng update_rng(Rng::mix_seed(seed, kUpdateStream, static_cast<std::uint64_t>(iter)));
    double critic_sum = 0.0;
    double actor_sum = 0.0;
    int applied = 0;
    for (int u = 0; u < cfg.updates_per_iteration; ++u) {
      const UpdateDiag d = update(agent, buffer, update_rng);
      if (!d.skipped) {
        critic_sum += d.critic_loss;
        actor_sum += d.actor_loss;
        ++applied;
      }
    }

    double probe_success = 0.0;
    double probe_collision = 0.0;
    for (int ep = 0; ep < cfg.eval_episodes; ++ep) {
      const std::uint64_t idx = static_cast<std::uint64_t>(iter) * cfg.eval_episodes + ep;
      const ResetResult init = reset(scenario, Rng::mix_seed(seed, kProbeStream, idx));
      EnvState state = init.state;
      Rng greedy_rng(0);
      bool collided = false;
      for (int t = 0; t < scenario.episode_len; ++t) {
        const Vec3 action =
            select_action(agent, observe(state, init.goal, scenario), false, greedy_rng);
        const StepResult sr = step(scenario, state, action, init.goal);
        collided = collided || sr.collided;
        state = sr.next;
      }
      if (is_success(state.object_pos, init.goal, scenario.success_radius)) probe_success += 1.0;
      if (collided) probe_collision += 1.0;
    }

    IterationStats stats;
    stats.iteration = iter;
    stats.critic_loss = applied > 0 ? critic_sum / applied : 0.0;
    stats.actor_loss = applied > 0 ? actor_sum / applied : 0.0;
    stats.rollout_return = return_sum / per_iter;
    stats.rollout_success = success_sum / per_iter;
    stats.probe_success = cfg.eval_episodes > 0 ? probe_success / cfg.eval_episodes : 0.0;
    stats.probe_collision = cfg.eval_episodes > 0 ? probe_collision / cfg.eval_episodes : 0.0;
    stats.buffer_size = static_cast<int>(buffer.size());
    stats.pool_size = pool.size();
    stats.hgg_active = hgg_active;
    result.curve.push_back(stats);
    if (progress) progress(stats);
  }
  return result;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void append_number(std::string& out, int v) {
  char buf[16];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

void write_curve_csv(const std::string& path, const std::vector<IterationStats>& curve) {
  std::string text =
      "iteration,critic_loss,actor_loss,rollout_return,rollout_success,probe_success,"
      "probe_collision,buffer_size,pool_size,hgg_active\n";
  for (const auto& s : curve) {
    append_number(text, s.iteration);
    text += ',';
    append_number(text, s.critic_loss);
    text += ',';
    append_number(text, s.actor_loss);
    text += ',';
    append_number(text, s.rollout_return);
    text += ',';
    append_number(text, s.rollout_success);
    text += ',';
    append_number(text, s.probe_success);
    text += ',';
    append_number(text, s.probe_collision);
    text += ',';
    append_number(text, s.buffer_size);
    text += ',';
    append_number(text, s.pool_size);
    text += ',';
    text += s.hgg_active ? '1' : '0';
    text += '\n';
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace safe_manip
