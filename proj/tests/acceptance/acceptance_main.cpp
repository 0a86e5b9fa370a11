// Acceptance suite: ten end-to-end criteria over the full stack, one
// PASS/FAIL line each, nonzero exit when any criterion fails. Heavier than
// the unit tests by design; the training criterion runs a complete
// curriculum from scratch.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "safe_manip/controller.hpp"
#include "safe_manip/env.hpp"
#include "safe_manip/errors.hpp"
#include "safe_manip/eval.hpp"
#include "safe_manip/hungarian.hpp"
#include "safe_manip/mpc.hpp"
#include "safe_manip/tinynet.hpp"
#include "safe_manip/train.hpp"

using namespace safe_manip;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Check {
  std::ostringstream detail;
  bool ok = true;

  template <typename T, typename U>
  void require(bool cond, const char* label, const T& got, const U& want) {
    if (cond) return;
    ok = false;
    detail << (detail.str().empty() ? "" : "; ") << label << ": got " << got << ", want " << want;
  }
  void note(const std::string& s) {
    detail << (detail.str().empty() ? "" : "; ") << s;
  }
  Outcome done() { return {ok, detail.str()}; }
};

const TomlTable& config_root() {
  static const TomlTable root = TomlTable::parse_file(TEST_CONFIG_PATH);
  return root;
}

ScenarioConfig scenario(const std::string& name) {
  return load_scenario(config_root(), name);
}

const std::vector<std::string> kPlanarScenarios = {
    "DynamicSquareObstacles", "DynamicMixedObstacles", "DynamicRectObstacles"};

std::vector<std::pair<std::string, EvalReport>> g_reports;  // criterion 8 audits these

// ---------------------------------------------------------------------------

Outcome criterion_smooth_max() {
  Check c;
  const double xs[] = {0.0, 1.0, 2.0};
  double prev = 1e100;
  for (double alpha : {1.0, 10.0, 100.0}) {
    const double gap = std::abs(smooth_max(xs, 3, alpha) - 2.0);
    c.require(gap < prev, "gap strictly decreasing at alpha", gap, prev);
    prev = gap;
  }
  c.require(prev <= 1e-3, "gap at alpha 100", prev, "<= 1e-3");
  return c.done();
}

Outcome criterion_constraint_agreement() {
  Check c;
  const auto t0 = Clock::now();
  for (const auto& name : {"DynamicSquareObstacles", "DynamicMixedObstacles",
                           "DynamicRectObstacles", "DynamicLiftedObstacles"}) {
    const ScenarioConfig s = scenario(name);
    Rng rng(Rng::mix_seed(0xC2, std::hash<std::string>{}(name), 0));
    long mismatches = 0;
    long smooth_checked = 0;
    double worst_smooth = 0.0;
    for (int i = 0; i < 10000; ++i) {
      Vec3 p;
      for (int a = 0; a < 3; ++a) {
        p[a] = rng.uniform(s.workspace_min[a], s.workspace_max[a]);
      }
      const ObstacleSpec& tpl =
          s.obstacles[static_cast<std::size_t>(i) % s.obstacles.size()];
      ObstacleState box;
      box.half_extents = tpl.half_extents;
      for (int a = 0; a < 3; ++a) {
        box.center[a] = rng.uniform(s.workspace_min[a], s.workspace_max[a]);
      }

      const bool overlap =
          aabb_overlap(p, s.object_half_extents, box.center, box.half_extents);
      const double h = constraint_h_exact(p, box, s.object_half_extents);
      if ((h < 0.5) != overlap) ++mismatches;

      // Euclidean distance to the inflated box surface.
      const Vec3 b = box.half_extents + s.object_half_extents;
      Vec3 d;
      for (int a = 0; a < 3; ++a) d[a] = std::abs(p[a] - box.center[a]);
      double boundary_dist;
      if (d.x < b.x && d.y < b.y && d.z < b.z) {
        boundary_dist = std::min({b.x - d.x, b.y - d.y, b.z - d.z});
      } else {
        Vec3 out{std::max(0.0, d.x - b.x), std::max(0.0, d.y - b.y),
                 std::max(0.0, d.z - b.z)};
        boundary_dist = out.norm();
      }
      if (boundary_dist >= 0.01) {
        ++smooth_checked;
        const double dev =
            std::abs(constraint_h_smooth(p, box, s.object_half_extents, 300.0) - h);
        worst_smooth = std::max(worst_smooth, dev);
      }
    }
    c.require(mismatches == 0, (std::string(name) + " sign mismatches").c_str(), mismatches, 0);
    c.require(worst_smooth <= 1e-3, (std::string(name) + " worst smooth deviation").c_str(),
              worst_smooth, "<= 1e-3");
    c.require(smooth_checked > 5000, (std::string(name) + " qualifying pairs").c_str(),
              smooth_checked, "> 5000");
  }
  const double elapsed = seconds_since(t0);
  c.require(elapsed < 5.0, "elapsed seconds", elapsed, "< 5");
  return c.done();
}

Outcome criterion_safety_floor() {
  Check c;
  const auto t0 = Clock::now();
  for (const auto& name : kPlanarScenarios) {
    const ScenarioConfig s = scenario(name);
    const MpcProblem problem = load_mpc_problem(config_root(), s);
    // Untrained policy: intermediate goals are arbitrary, safety must hold.
    const DdpgAgent agent = make_agent(s, DdpgConfig{}, 21);
    SafetyStats safety;
    const EvalReport rep =
        evaluate(s, ControllerKind::kMpcHgg, &agent, problem, 100, 33, 0, &safety);
    g_reports.emplace_back(name, rep);
    c.require(safety.episodes_with_collision == 0,
              (name + " episodes with a collision").c_str(), safety.episodes_with_collision, 0);
    c.require(safety.feasible_collisions == 0,
              (name + " collisions on solver-feasible steps").c_str(),
              safety.feasible_collisions, 0);
    c.note(name + " feasible steps " + std::to_string(safety.feasible_steps) + "/" +
           std::to_string(safety.total_steps));
  }
  const double elapsed = seconds_since(t0);
  c.require(elapsed < 300.0, "elapsed seconds", elapsed, "< 300");
  return c.done();
}

Outcome criterion_gradients() {
  Check c;
  const auto t0 = Clock::now();
  const double h = 1e-5;

  // Network backward against central differences.
  double worst_net = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(900 + trial);
    const int in = static_cast<int>(rng.uniform_int(2, 6));
    const int hid = static_cast<int>(rng.uniform_int(2, 6));
    const int out = static_cast<int>(rng.uniform_int(1, 4));
    const int batch = static_cast<int>(rng.uniform_int(1, 4));
    const auto head = trial % 2 == 0 ? Mlp::Head::kTanh : Mlp::Head::kIdentity;
    Mlp net = make_mlp({in, hid, out}, head, rng);

    Eigen::MatrixXd x(in, batch), dout(out, batch);
    for (int j = 0; j < batch; ++j) {
      for (int i = 0; i < in; ++i) x(i, j) = rng.uniform(-1.0, 1.0);
      for (int i = 0; i < out; ++i) dout(i, j) = rng.uniform(-1.0, 1.0);
    }
    ForwardCache cache;
    forward(net, x, &cache);
    MlpGrads grads;
    const Eigen::MatrixXd dx = backward(net, cache, dout, &grads);
    const auto loss = [&](const Mlp& n, const Eigen::MatrixXd& input) {
      return (forward(n, input).array() * dout.array()).sum();
    };

    for (int probe = 0; probe < 30; ++probe) {
      const int layer = static_cast<int>(rng.uniform_int(0, net.layer_count() - 1));
      Eigen::MatrixXd& w = net.weights[static_cast<std::size_t>(layer)];
      const int r = static_cast<int>(rng.uniform_int(0, static_cast<int>(w.rows()) - 1));
      const int col = static_cast<int>(rng.uniform_int(0, static_cast<int>(w.cols()) - 1));
      const double keep = w(r, col);
      w(r, col) = keep + h;
      const double up = loss(net, x);
      w(r, col) = keep - h;
      const double down = loss(net, x);
      w(r, col) = keep;
      const double fd = (up - down) / (2.0 * h);
      const double an = grads.d_weights[static_cast<std::size_t>(layer)](r, col);
      worst_net = std::max(worst_net, std::abs(fd - an) / std::max(1.0, std::abs(fd)));
    }
    for (int i = 0; i < in; ++i) {
      Eigen::MatrixXd up = x, down = x;
      up(i, 0) += h;
      down(i, 0) -= h;
      const double fd = (loss(net, up) - loss(net, down)) / (2.0 * h);
      worst_net = std::max(worst_net, std::abs(fd - dx(i, 0)) / std::max(1.0, std::abs(fd)));
    }
  }
  c.require(worst_net <= 1e-4, "worst network gradient rel err", worst_net, "<= 1e-4");

  // Planner cost gradient against central differences.
  const PointMassModel model;
  MpcProblem problem;
  problem.horizon = 6;
  double worst_cost = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(1400 + trial);
    ObstacleState box;
    box.center = {rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), 0.02};
    box.half_extents = {0.05, 0.08, 0.02};
    MpcParams params;
    params.goal = {rng.uniform(0.5, 0.9), rng.uniform(0.2, 0.8), 0.02};
    params.robot_half_extents = {0.02, 0.02, 0.02};
    params.obstacle_stages.assign(static_cast<std::size_t>(problem.horizon), {box});
    const MpcState init{{rng.uniform(0.05, 0.3), rng.uniform(0.2, 0.8), 0.02},
                        {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 0.0}};
    Eigen::Matrix3Xd u(3, problem.horizon);
    for (int k = 0; k < problem.horizon; ++k) {
      for (int i = 0; i < 3; ++i) u(i, k) = rng.uniform(-model.f_max, model.f_max);
    }

    Eigen::Matrix3Xd grad(3, problem.horizon);
    total_cost(model, problem, params, init, u, &grad);
    Eigen::Matrix3Xd fd(3, problem.horizon);
    for (int k = 0; k < problem.horizon; ++k) {
      for (int i = 0; i < 3; ++i) {
        Eigen::Matrix3Xd up = u, down = u;
        up(i, k) += h;
        down(i, k) -= h;
        fd(i, k) = (total_cost(model, problem, params, init, up) -
                    total_cost(model, problem, params, init, down)) /
                   (2.0 * h);
      }
    }
    worst_cost = std::max(worst_cost, (fd - grad).norm() / std::max(1.0, fd.norm()));
  }
  c.require(worst_cost <= 1e-5, "worst planner gradient rel err", worst_cost, "<= 1e-5");

  const double elapsed = seconds_since(t0);
  c.require(elapsed < 30.0, "elapsed seconds", elapsed, "< 30");
  return c.done();
}

Outcome criterion_assignment() {
  Check c;
  for (int k = 2; k <= 6; ++k) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Rng rng(Rng::mix_seed(0xA55, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(trial)));
      Eigen::MatrixXd cost(k, k);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) cost(i, j) = rng.uniform(0.0, 10.0);
      }
      const double solved = assignment_cost(cost, solve_assignment(cost));

      std::vector<int> perm(static_cast<std::size_t>(k));
      std::iota(perm.begin(), perm.end(), 0);
      double best = 1e100;
      do {
        double total = 0.0;
        for (int i = 0; i < k; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
        best = std::min(best, total);
      } while (std::next_permutation(perm.begin(), perm.end()));
      worst = std::max(worst, std::abs(solved - best));
    }
    c.require(worst <= 1e-9, ("K=" + std::to_string(k) + " worst cost gap").c_str(), worst,
              "<= 1e-9");
  }
  return c.done();
}

Outcome criterion_relabeling() {
  Check c;
  const ScenarioConfig s = scenario("DynamicRectObstacles");

  // A real rollout under small random actions, collision-free by seed.
  Trajectory traj;
  {
    Rng rng(3);
    ResetResult init = reset(s, 17);
    traj.goal = init.goal;
    traj.states.push_back(init.state);
    EnvState state = init.state;
    for (int t = 0; t < s.episode_len; ++t) {
      const Vec3 a{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 0.0};
      StepResult r = step(s, state, a, init.goal);
      traj.actions.push_back(a);
      traj.rewards.push_back(r.reward);
      traj.collided.push_back(r.collided);
      state = r.next;
      traj.states.push_back(state);
    }
  }
  bool any_collision = false;
  for (bool col : traj.collided) any_collision = any_collision || col;
  c.require(!any_collision, "rollout stayed collision free", any_collision, false);

  const int horizon = traj.horizon();
  HggConfig final_cfg;
  final_cfg.her = HggConfig::Her::kFinal;
  {
    ReplayBuffer buffer(4096);
    Rng rng(5);
    relabel_and_store(buffer, traj, s, final_cfg, rng);
    c.require(buffer.size() == static_cast<std::size_t>(2 * horizon), "final strategy size",
              buffer.size(), 2 * horizon);
    // Layout interleaves (original, relabeled); the last relabeled
    // transition ends at the episode's own final achieved goal.
    const Transition& last = buffer.at(buffer.size() - 1);
    c.require(last.reward == 0.0, "terminal relabeled reward", last.reward, 0.0);
  }

  // A collided step keeps eta under the final and every future relabel.
  Trajectory crashed = traj;
  const int crash_t = horizon / 2;
  crashed.collided[static_cast<std::size_t>(crash_t)] = true;
  crashed.rewards[static_cast<std::size_t>(crash_t)] = s.eta;
  {
    ReplayBuffer buffer(4096);
    Rng rng(5);
    relabel_and_store(buffer, crashed, s, final_cfg, rng);
    const Transition& re = buffer.at(static_cast<std::size_t>(2 * crash_t + 1));
    c.require(re.collided, "relabeled transition keeps the collision flag", re.collided, true);
    c.require(re.reward == s.eta, "final-relabel reward on a collided step", re.reward, s.eta);
  }
  HggConfig future_cfg;
  future_cfg.her = HggConfig::Her::kFuture;
  future_cfg.her_k = 4;
  {
    ReplayBuffer buffer(8192);
    Rng rng(5);
    relabel_and_store(buffer, crashed, s, future_cfg, rng);
    const std::size_t stride = 1 + static_cast<std::size_t>(future_cfg.her_k);
    c.require(buffer.size() == stride * static_cast<std::size_t>(horizon), "future strategy size",
              buffer.size(), stride * static_cast<std::size_t>(horizon));
    for (std::size_t j = 1; j <= static_cast<std::size_t>(future_cfg.her_k); ++j) {
      const Transition& re = buffer.at(static_cast<std::size_t>(crash_t) * stride + j);
      c.require(re.reward == s.eta, "future-relabel reward on a collided step", re.reward, s.eta);
    }
  }
  return c.done();
}

DdpgAgent* g_trained = nullptr;

Outcome criterion_training() {
  Check c;
  const std::clock_t cpu0 = std::clock();
  const auto t0 = Clock::now();

  const ScenarioConfig s = scenario("DynamicRectObstacles");
  TrainConfig cfg = load_train_config(config_root());
  c.require(cfg.iterations == 500, "configured iterations", cfg.iterations, 500);
  c.require(cfg.episodes_per_iteration == 8, "episodes per iteration",
            cfg.episodes_per_iteration, 8);

  static TrainResult result = train(s, cfg, 1, [](const IterationStats& it) {
    if (it.iteration % 50 == 0) {
      std::fprintf(stderr, "  [train] iter %d probe_success %.2f probe_collision %.2f\n",
                   it.iteration, it.probe_success, it.probe_collision);
    }
  });
  g_trained = &result.agent;

  const MpcProblem problem = load_mpc_problem(config_root(), s);
  const EvalReport plain =
      evaluate(s, ControllerKind::kHgg, &result.agent, problem, 100, 7);
  const EvalReport shielded =
      evaluate(s, ControllerKind::kMpcHgg, &result.agent, problem, 100, 7);
  g_reports.emplace_back("trained hgg", plain);
  g_reports.emplace_back("trained mpc-hgg", shielded);

  c.require(plain.reach_rate >= 0.60, "policy reach rate (collisions ignored)",
            plain.reach_rate, ">= 0.60");
  c.require(shielded.tolerance[0].rate >= plain.tolerance[0].rate,
            "shielded zero-tolerance success at least the bare policy's",
            shielded.tolerance[0].rate, plain.tolerance[0].rate);
  c.require(shielded.median_collisions == 0.0, "shielded median collisions",
            shielded.median_collisions, 0.0);

  const double cpu = static_cast<double>(std::clock() - cpu0) / CLOCKS_PER_SEC;
  c.require(cpu <= 1200.0, "cpu seconds", cpu, "<= 1200");
  c.note("wall " + std::to_string(seconds_since(t0)) + " s, reach " +
         std::to_string(plain.reach_rate) + ", shielded tol0 " +
         std::to_string(shielded.tolerance[0].rate) + " vs bare " +
         std::to_string(plain.tolerance[0].rate));
  return c.done();
}

Outcome criterion_monotone_reports() {
  Check c;
  c.require(g_reports.size() >= 7, "reports audited", g_reports.size(), ">= 7");
  for (const auto& [label, rep] : g_reports) {
    c.require(rep.tolerance[0].rate <= rep.tolerance[1].rate,
              (label + " success(0) <= success(1)").c_str(), rep.tolerance[0].rate,
              rep.tolerance[1].rate);
    c.require(rep.tolerance[1].rate <= rep.tolerance[2].rate,
              (label + " success(1) <= success(2)").c_str(), rep.tolerance[1].rate,
              rep.tolerance[2].rate);
  }
  return c.done();
}

Outcome criterion_determinism() {
  Check c;
  const ScenarioConfig s = scenario("DynamicRectObstacles");
  TrainConfig cfg = load_train_config(config_root());
  cfg.iterations = 3;

  const TrainResult a = train(s, cfg, 5);
  const TrainResult b = train(s, cfg, 5);
  const std::string ja = checkpoint_to_json(a.agent);
  const std::string jb = checkpoint_to_json(b.agent);
  c.require(ja == jb, "smoke training checkpoints byte-identical", ja.size(),
            jb.size());
  c.require(a.curve.size() == b.curve.size() && !a.curve.empty(), "curve lengths",
            a.curve.size(), b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    c.require(a.curve[i].critic_loss == b.curve[i].critic_loss, "critic loss repeats",
              a.curve[i].critic_loss, b.curve[i].critic_loss);
  }

  const MpcProblem problem = load_mpc_problem(config_root(), s);
  const EvalReport one = evaluate(s, ControllerKind::kHgg, &a.agent, problem, 16, 11, 1);
  const EvalReport three = evaluate(s, ControllerKind::kHgg, &a.agent, problem, 16, 11, 3);
  g_reports.emplace_back("smoke eval threads=1", one);
  g_reports.emplace_back("smoke eval threads=3", three);
  c.require(one.to_json() == three.to_json(), "eval report bytes across worker counts",
            one.to_json().size(), three.to_json().size());
  return c.done();
}

Outcome criterion_solver_latency() {
  Check c;
  const ScenarioConfig s = scenario("DynamicRectObstacles");
  const MpcProblem problem = load_mpc_problem(config_root(), s);
  c.require(problem.horizon == 8, "solver horizon", problem.horizon, 8);

  std::vector<double> millis;
  for (std::uint64_t seed = 101; seed <= 103; ++seed) {
    ResetResult init = reset(s, seed);
    EnvState state = init.state;
    ControllerState ctrl;
    for (int t = 0; t < s.episode_len; ++t) {
      const auto t0 = Clock::now();
      ActResult ar = act(nullptr, s, problem, ControllerKind::kMpc, ctrl, state, init.goal);
      millis.push_back(seconds_since(t0) * 1000.0);
      state = step(s, state, ar.action, init.goal).next;
    }
  }
  c.require(millis.size() >= 100, "timed solves", millis.size(), ">= 100");
  std::sort(millis.begin(), millis.end());
  const double median = millis[millis.size() / 2];
  c.require(median <= 50.0, "median solve milliseconds", median, "<= 50");
  c.note("median " + std::to_string(median) + " ms, p95 " +
         std::to_string(millis[millis.size() * 95 / 100]) + " ms over " +
         std::to_string(millis.size()) + " solves");
  return c.done();
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    Outcome (*run)();
  };
  // Execution order differs from report order only for the report audit,
  // which must run after every report-producing criterion.
  const std::vector<Entry> entries = {
      {1, "smooth-max convergence", criterion_smooth_max},
      {2, "constraint agreement", criterion_constraint_agreement},
      {3, "untrained safety floor", criterion_safety_floor},
      {4, "gradient checks", criterion_gradients},
      {5, "assignment optimality", criterion_assignment},
      {6, "hindsight relabeling", criterion_relabeling},
      {7, "curriculum training", criterion_training},
      {9, "determinism", criterion_determinism},
      {10, "solver latency", criterion_solver_latency},
      {8, "report monotonicity", criterion_monotone_reports},
  };

  std::vector<std::pair<Entry, Outcome>> results;
  for (const auto& e : entries) {
    std::fprintf(stderr, "running criterion %d [%s]...\n", e.id, e.name);
    Outcome out;
    try {
      out = e.run();
    } catch (const std::exception& ex) {
      out.pass = false;
      out.detail = std::string("unhandled exception: ") + ex.what();
    }
    results.emplace_back(e, out);
  }
  std::sort(results.begin(), results.end(),
            [](const auto& a, const auto& b) { return a.first.id < b.first.id; });

  int failures = 0;
  for (const auto& [entry, out] : results) {
    if (out.pass) {
      std::printf("CRITERION %d [%s]: PASS%s%s\n", entry.id, entry.name,
                  out.detail.empty() ? "" : " -- ", out.detail.c_str());
    } else {
      ++failures;
      std::printf("CRITERION %d [%s]: FAIL%s%s\n", entry.id, entry.name,
                  out.detail.empty() ? "" : " -- ", out.detail.c_str());
    }
  }
  if (failures > 0) std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
