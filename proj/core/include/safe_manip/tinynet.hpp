#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "safe_manip/rng.hpp"

namespace safe_manip {

// Dense MLP with ReLU hidden layers. Batches are column-major: each column
// of an input/output matrix is one sample.
struct Mlp {
  enum class Head { kTanh, kIdentity };

  std::vector<int> layer_sizes;  // {in, hidden..., out}
  Head head = Head::kIdentity;
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: layer_sizes[l+1] x layer_sizes[l]
  std::vector<Eigen::VectorXd> biases;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
};

// Weights and biases uniform in +-1/sqrt(fan_in), drawn in a fixed order so
// a seed pins the parameters exactly.
Mlp make_mlp(const std::vector<int>& layer_sizes, Mlp::Head head, Rng& rng);

// Pre-activations and activations retained for backward.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, acts[L] = output
  std::vector<Eigen::MatrixXd> pre;   // pre[l] = W[l] acts[l] + b[l]
};

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input,
                        ForwardCache* cache = nullptr);
Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& input);

struct MlpGrads {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
};

// Exact reverse-mode gradients of the scalar loss whose output gradient is
// d_output; also returns the gradient with respect to the input batch.
// The cache must come from a forward() over this net with these shapes,
// otherwise a ShapeError is thrown.
Eigen::MatrixXd backward(const Mlp& net, const ForwardCache& cache,
                         const Eigen::MatrixXd& d_output, MlpGrads* grads);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
};

AdamState make_adam(const Mlp& net, double lr);

// One Adam update with bias correction; step increments once per call.
void adam_step(Mlp& net, const MlpGrads& grads, AdamState& opt);

// target <- tau * source + (1 - tau) * target. tau = 1 copies exactly.
void soft_update(Mlp& target, const Mlp& source, double tau);

}  // namespace safe_manip
