#include "safe_manip/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "safe_manip/errors.hpp"

namespace safe_manip {

RolloutRecord run_controller_episode(const ScenarioConfig& scenario, ControllerKind kind,
                                     const DdpgAgent* agent, const MpcProblem& problem,
                                     std::uint64_t env_seed) {
  if (kind != ControllerKind::kMpc && agent == nullptr) {
    throw ConfigError("controller '" + controller_name(kind) + "' needs a checkpoint");
  }
  RolloutRecord rec;
  rec.env_seed = env_seed;
  ResetResult init = reset(scenario, env_seed);
  EnvState state = init.state;
  rec.traj.goal = init.goal;
  rec.traj.states.push_back(state);

  ControllerState ctrl;
  bool prev_collided = false;
  for (int t = 0; t < scenario.episode_len; ++t) {
    ActResult ar = act(agent, scenario, problem, kind, ctrl, state, init.goal);
    StepResult sr = step(scenario, state, ar.action, init.goal);

    rec.traj.actions.push_back(ar.action);
    rec.traj.rewards.push_back(sr.reward);
    rec.traj.collided.push_back(sr.collided);
    rec.diags.push_back(std::move(ar.diag));
    rec.total_reward += sr.reward;

    if (rec.diags.back().solver_ran && rec.diags.back().feasible) {
      ++rec.feasible_steps;
      if (sr.collided) ++rec.feasible_collisions;
    }
    if (sr.collided && !prev_collided) ++rec.collisions;
    prev_collided = sr.collided;

    state = sr.next;
    rec.traj.states.push_back(state);
    if (rec.first_success_step < 0 &&
        is_success(state.object_pos, init.goal, scenario.success_radius)) {
      rec.first_success_step = t;
    }
  }
  rec.success = is_success(state.object_pos, init.goal, scenario.success_radius);
  return rec;
}

int resolve_thread_count(int requested, int episodes) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("SAFE_MANIP_THREADS")) {
      n = std::atoi(env);
    }
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  return std::max(1, std::min(n, std::max(episodes, 1)));
}

namespace {

ToleranceStat wilson(long successes, long n) {
  ToleranceStat s;
  if (n <= 0) return s;
  const double z = 1.959963984540054;
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double z2n = z * z / static_cast<double>(n);
  const double denom = 1.0 + z2n;
  const double center = (p + z2n / 2.0) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / static_cast<double>(n) + z2n / (4.0 * static_cast<double>(n))) /
      denom;
  s.rate = p;
  s.ci_lo = std::max(0.0, center - half);
  s.ci_hi = std::min(1.0, center + half);
  return s;
}

}  // namespace

EvalReport evaluate(const ScenarioConfig& scenario, ControllerKind kind, const DdpgAgent* agent,
                    const MpcProblem& problem, int episodes, std::uint64_t seed, int threads,
                    SafetyStats* safety, std::vector<RolloutRecord>* keep) {
  if (episodes < 0) throw ConfigError("evaluate: episodes must be >= 0");
  if (kind != ControllerKind::kMpc) {
    if (agent == nullptr) {
      throw ConfigError("controller '" + controller_name(kind) + "' needs a checkpoint");
    }
    if (agent->scenario_name != scenario.name) {
      throw ConfigError("checkpoint was trained on '" + agent->scenario_name +
                        "' but evaluation requested '" + scenario.name + "'");
    }
    if (agent->obs_dim != observation_size(scenario)) {
      throw ConfigError("checkpoint observation size does not match scenario");
    }
  }

  std::vector<RolloutRecord> records(static_cast<std::size_t>(episodes));
  const int workers = resolve_thread_count(threads, episodes);
  if (episodes > 0) {
    std::atomic<int> cursor{0};
    auto work = [&]() {
      for (;;) {
        const int i = cursor.fetch_add(1);
        if (i >= episodes) break;
        records[static_cast<std::size_t>(i)] = run_controller_episode(
            scenario, kind, agent, problem,
            Rng::mix_seed(seed, 0xEAA1, static_cast<std::uint64_t>(i)));
      }
    };
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
  }

  EvalReport report;
  report.scenario = scenario.name;
  report.controller = controller_name(kind);
  report.episodes = episodes;
  report.seed = seed;
  report.has_rates = episodes > 0;

  if (episodes > 0) {
    long success_at[3] = {0, 0, 0};
    long reach = 0;
    double length_sum = 0.0;
    std::vector<int> counts;
    counts.reserve(static_cast<std::size_t>(episodes));
    for (const auto& rec : records) {
      for (int tol = 0; tol < 3; ++tol) {
        if (rec.success && rec.collisions <= tol) ++success_at[tol];
      }
      if (rec.success) ++reach;
      report.collision_histogram[rec.collisions] += 1;
      counts.push_back(rec.collisions);
      length_sum += rec.first_success_step >= 0 ? rec.first_success_step + 1
                                                : scenario.episode_len;
      if (safety != nullptr) {
        safety->total_steps += rec.traj.horizon();
        safety->feasible_steps += rec.feasible_steps;
        safety->feasible_collisions += rec.feasible_collisions;
        if (rec.collisions > 0) ++safety->episodes_with_collision;
      }
    }
    for (int tol = 0; tol < 3; ++tol) {
      report.tolerance[static_cast<std::size_t>(tol)] = wilson(success_at[tol], episodes);
    }
    report.reach_rate = static_cast<double>(reach) / episodes;
    report.mean_episode_length = length_sum / episodes;
    std::sort(counts.begin(), counts.end());
    const std::size_t n = counts.size();
    report.median_collisions =
        n % 2 == 1 ? counts[n / 2] : 0.5 * (counts[n / 2 - 1] + counts[n / 2]);
  }

  if (keep != nullptr) *keep = std::move(records);
  return report;
}

namespace {

using Json = nlohmann::ordered_json;

constexpr int kReportVersion = 1;

}  // namespace

std::string EvalReport::to_json() const {
  Json j;
  j["version"] = kReportVersion;
  j["scenario"] = scenario;
  j["controller"] = controller;
  j["episodes"] = episodes;
  j["seed"] = seed;
  if (has_rates) {
    Json success;
    for (int tol = 0; tol < 3; ++tol) {
      const auto& s = tolerance[static_cast<std::size_t>(tol)];
      Json entry;
      entry["rate"] = s.rate;
      entry["ci95"] = {s.ci_lo, s.ci_hi};
      success["tolerance_" + std::to_string(tol)] = std::move(entry);
    }
    j["success"] = std::move(success);
    j["reach_rate"] = reach_rate;
    Json hist = Json::object();
    for (const auto& [collisions, count] : collision_histogram) {
      hist[std::to_string(collisions)] = count;
    }
    j["collision_histogram"] = std::move(hist);
    j["mean_episode_length"] = mean_episode_length;
    j["median_collisions"] = median_collisions;
  } else {
    j["success"] = nullptr;
    j["reach_rate"] = nullptr;
    j["collision_histogram"] = nullptr;
    j["mean_episode_length"] = nullptr;
    j["median_collisions"] = nullptr;
  }
  return j.dump(1) + "\n";
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << "scenario: " << scenario << "   controller: " << controller << "   episodes: " << episodes
      << "   seed: " << seed << "\n";
  if (!has_rates) {
    out << "(no episodes evaluated; success rates absent)\n";
    return out.str();
  }
  char line[160];
  out << "tolerance   success      95% CI\n";
  for (int tol = 0; tol < 3; ++tol) {
    const auto& s = tolerance[static_cast<std::size_t>(tol)];
    std::snprintf(line, sizeof(line), "%9d   %6.1f%%   [%5.1f%%, %5.1f%%]\n", tol,
                  100.0 * s.rate, 100.0 * s.ci_lo, 100.0 * s.ci_hi);
    out << line;
  }
  std::snprintf(line, sizeof(line),
                "reach rate (collisions ignored): %.1f%%\nmedian collisions/episode: %.1f\n"
                "mean episode length: %.1f steps\n",
                100.0 * reach_rate, median_collisions, mean_episode_length);
  out << line;
  out << "collision histogram (events -> episodes):";
  for (const auto& [collisions, count] : collision_histogram) {
    out << " " << collisions << ":" << count;
  }
  out << "\n";
  return out.str();
}

}  // namespace safe_manip
