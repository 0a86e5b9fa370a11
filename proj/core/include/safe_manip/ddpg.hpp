#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "safe_manip/env.hpp"
#include "safe_manip/tinynet.hpp"

namespace safe_manip {

struct DdpgConfig {
  double gamma = 0.98;
  double tau = 0.05;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double noise_sigma = 0.2;
  double action_scale = 1.0;  // actor tanh output is scaled by this
  int batch_size = 128;
  std::vector<int> hidden = {128, 128};
  std::size_t buffer_capacity = 100000;
};

// One stored transition; obs vectors already have the goal appended.
struct Transition {
  Eigen::VectorXd obs;
  Vec3 action;
  double reward = -1.0;
  Eigen::VectorXd next_obs;
  bool collided = false;
};

// Fixed-capacity ring buffer, oldest entries overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return data_[i]; }

 private:
  std::vector<Transition> data_;
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::size_t size_ = 0;
};

struct DdpgAgent {
  DdpgConfig cfg;
  int obs_dim = 0;
  int action_dim = 3;
  std::string scenario_name;
  Mlp actor, critic, target_actor, target_critic;
  AdamState actor_opt, critic_opt;

  double value_floor() const { return -1.0 / (1.0 - cfg.gamma); }
};

DdpgAgent make_agent(const ScenarioConfig& scenario, const DdpgConfig& cfg, std::uint64_t seed);

// Deterministic tanh policy action; with explore, Gaussian noise of
// noise_sigma is added before the final clamp to [-1, 1].
Vec3 select_action(const DdpgAgent& agent, const Eigen::VectorXd& obs_goal, bool explore,
                   Rng& rng);

// Goal-conditioned value estimate Q(s||g, pi(s||g)), clipped to
// [-1/(1-gamma), 0].
double value_of(const DdpgAgent& agent, const Eigen::VectorXd& obs_goal);
Eigen::VectorXd value_batch(const DdpgAgent& agent, const Eigen::MatrixXd& obs_goals);

struct UpdateDiag {
  bool skipped = false;  // buffer had fewer than batch_size transitions
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double mean_target = 0.0;
};

// One DDPG step: clipped TD targets from the target nets, critic MSE step,
// actor ascent on Q, then soft target updates.
UpdateDiag update(DdpgAgent& agent, const ReplayBuffer& buffer, Rng& rng);

// Checkpoint I/O; JSON round-trips every double bit-exactly.
std::string checkpoint_to_json(const DdpgAgent& agent);
DdpgAgent checkpoint_from_json(const std::string& text);
void save_checkpoint(const std::string& path, const DdpgAgent& agent);
DdpgAgent load_checkpoint(const std::string& path);

}  // namespace safe_manip
