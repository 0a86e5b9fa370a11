#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "safe_manip/errors.hpp"
#include "safe_manip/eval.hpp"
#include "safe_manip/svg_render.hpp"
#include "safe_manip/train.hpp"
#include "safe_manip/trajlog.hpp"

namespace fs = std::filesystem;
using namespace safe_manip;

namespace {

struct CommonArgs {
  std::string config = "configs/scenarios.toml";
  std::string scenario;
  std::string controller = "mpc-hgg";
  std::string checkpoint;
  std::uint64_t seed = 1;
};

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::unique_ptr<DdpgAgent> maybe_load_agent(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_unique<DdpgAgent>(load_checkpoint(path));
}

int cmd_train(const CommonArgs& args, int iterations_override, const std::string& out_dir) {
  const TomlTable root = TomlTable::parse_file(args.config);
  const ScenarioConfig scenario = load_scenario(root, args.scenario);
  TrainConfig cfg = load_train_config(root);
  if (iterations_override > 0) cfg.iterations = iterations_override;

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

  std::printf("training %s for %d iterations (seed %llu)\n", scenario.name.c_str(),
              cfg.iterations, static_cast<unsigned long long>(args.seed));
  const int stride = std::max(1, cfg.iterations / 50);
  TrainResult result = train(scenario, cfg, args.seed, [&](const IterationStats& s) {
    if (s.iteration % stride != 0 && s.iteration + 1 != cfg.iterations) return;
    std::printf(
        "iter %4d | return %7.2f | rollout succ %4.2f | probe succ %4.2f | probe coll %4.2f | "
        "critic %.4f | %s\n",
        s.iteration, s.rollout_return, s.rollout_success, s.probe_success, s.probe_collision,
        s.critic_loss, s.hgg_active ? "hgg" : "bootstrap");
    std::fflush(stdout);
  });

  const std::string ckpt_path = (fs::path(out_dir) / "checkpoint.json").string();
  const std::string curve_path = (fs::path(out_dir) / "curve.csv").string();
  save_checkpoint(ckpt_path, result.agent);
  write_curve_csv(curve_path, result.curve);
  std::printf("wrote %s and %s\n", ckpt_path.c_str(), curve_path.c_str());
  return 0;
}

int cmd_eval(const CommonArgs& args, int episodes, int threads, const std::string& out_file,
             const std::string& traj_dir) {
  const TomlTable root = TomlTable::parse_file(args.config);
  const ScenarioConfig scenario = load_scenario(root, args.scenario);
  const MpcProblem problem = load_mpc_problem(root, scenario);
  const ControllerKind kind = controller_from_name(args.controller);
  const std::unique_ptr<DdpgAgent> agent = maybe_load_agent(args.checkpoint);

  SafetyStats safety;
  std::vector<RolloutRecord> records;
  const EvalReport report =
      evaluate(scenario, kind, agent.get(), problem, episodes, args.seed, threads, &safety,
               traj_dir.empty() ? nullptr : &records);

  std::fputs(report.to_table().c_str(), stdout);
  if (kind != ControllerKind::kHgg && safety.total_steps > 0) {
    std::printf("solver-feasible steps: %ld of %ld, collisions on feasible steps: %ld\n",
                safety.feasible_steps, safety.total_steps, safety.feasible_collisions);
  }

  if (!out_file.empty()) {
    write_text_file(out_file, report.to_json());
    std::printf("report written to %s\n", out_file.c_str());
  }
  if (!traj_dir.empty()) {
    std::error_code ec;
    fs::create_directories(traj_dir, ec);
    if (ec) throw IoError("cannot create directory '" + traj_dir + "': " + ec.message());
    for (std::size_t i = 0; i < records.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "episode_%04zu.jsonl", i);
      write_trajectory_log((fs::path(traj_dir) / name).string(), scenario, report.controller,
                           records[i].env_seed, records[i].traj, records[i].diags);
    }
    std::printf("%zu trajectory logs written to %s\n", records.size(), traj_dir.c_str());
  }
  return 0;
}

int cmd_demo(const CommonArgs& args, const std::string& out_file) {
  const TomlTable root = TomlTable::parse_file(args.config);
  const ScenarioConfig scenario = load_scenario(root, args.scenario);
  const MpcProblem problem = load_mpc_problem(root, scenario);
  const ControllerKind kind = controller_from_name(args.controller);
  const std::unique_ptr<DdpgAgent> agent = maybe_load_agent(args.checkpoint);

  const RolloutRecord rec =
      run_controller_episode(scenario, kind, agent.get(), problem, args.seed);
  write_trajectory_log(out_file, scenario, controller_name(kind), args.seed, rec.traj, rec.diags);
  std::printf("%s on %s, seed %llu: %s, %d collision event(s), return %.1f", args.controller.c_str(),
              scenario.name.c_str(), static_cast<unsigned long long>(args.seed),
              rec.success ? "success" : "no success", rec.collisions, rec.total_reward);
  if (rec.first_success_step >= 0) std::printf(", first success at step %d", rec.first_success_step);
  std::printf("\nlog written to %s\n", out_file.c_str());
  return 0;
}

int cmd_render(const std::string& input, std::string out_file) {
  if (out_file.empty()) out_file = fs::path(input).replace_extension(".svg").string();
  const TrajectoryLog log = read_trajectory_log(input);
  write_text_file(out_file, render_svg(log));
  std::printf("svg written to %s\n", out_file.c_str());
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Safe manipulation on a point mass: goal-curriculum RL planner with a "
               "predictive safety layer"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, demo_args;
  int iterations_override = 0;
  std::string train_out = "runs/latest";
  int episodes = 100;
  int threads = 0;
  std::string eval_out, traj_dir, demo_out = "demo.jsonl";
  std::string render_in, render_out;

  CLI::App* train_cmd = app.add_subcommand("train", "Train a planner policy");
  train_cmd->add_option("--config", train_args.config, "Scenario/config TOML file");
  train_cmd->add_option("--scenario", train_args.scenario, "Scenario name")->required();
  train_cmd->add_option("--seed", train_args.seed, "Run seed");
  train_cmd->add_option("--iterations", iterations_override, "Override configured iterations");
  train_cmd->add_option("--out", train_out, "Output directory for checkpoint.json and curve.csv");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a controller");
  eval_cmd->add_option("--config", eval_args.config, "Scenario/config TOML file");
  eval_cmd->add_option("--scenario", eval_args.scenario, "Scenario name")->required();
  eval_cmd->add_option("--controller", eval_args.controller, "hgg | mpc | mpc-hgg");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint (hgg and mpc-hgg)");
  eval_cmd->add_option("--seed", eval_args.seed, "Evaluation seed");
  eval_cmd->add_option("--episodes", episodes, "Episode count");
  eval_cmd->add_option("--threads", threads, "Worker threads (0: auto)");
  eval_cmd->add_option("--out", eval_out, "Write the JSON report here");
  eval_cmd->add_option("--save-trajectories", traj_dir, "Write per-episode JSONL logs here");

  CLI::App* demo_cmd = app.add_subcommand("demo", "Roll one episode and log it");
  demo_cmd->add_option("--config", demo_args.config, "Scenario/config TOML file");
  demo_cmd->add_option("--scenario", demo_args.scenario, "Scenario name")->required();
  demo_cmd->add_option("--controller", demo_args.controller, "hgg | mpc | mpc-hgg");
  demo_cmd->add_option("--checkpoint", demo_args.checkpoint, "Checkpoint (hgg and mpc-hgg)");
  demo_cmd->add_option("--seed", demo_args.seed, "Episode seed");
  demo_cmd->add_option("--out", demo_out, "Trajectory JSONL path");

  CLI::App* render_cmd = app.add_subcommand("render", "Render a trajectory log to SVG");
  render_cmd->add_option("input", render_in, "Trajectory JSONL file")->required();
  render_cmd->add_option("--out", render_out, "SVG path (default: input with .svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (train_cmd->parsed()) return cmd_train(train_args, iterations_override, train_out);
  if (eval_cmd->parsed()) return cmd_eval(eval_args, episodes, threads, eval_out, traj_dir);
  if (demo_cmd->parsed()) return cmd_demo(demo_args, demo_out);
  return cmd_render(render_in, render_out);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverDiverged& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
