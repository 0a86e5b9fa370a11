#include "safe_manip/tinynet.hpp"

#include <cmath>
#include <string>

#include "safe_manip/errors.hpp"

namespace safe_manip {

Mlp make_mlp(const std::vector<int>& layer_sizes, Mlp::Head head, Rng& rng) {
  if (layer_sizes.size() < 2) throw ShapeError("mlp needs at least input and output layers");
  for (int s : layer_sizes) {
    if (s <= 0) throw ShapeError("mlp layer sizes must be positive");
  }
  Mlp net;
  net.layer_sizes = layer_sizes;
  net.head = head;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    Eigen::VectorXd b(fan_out);
    for (int r = 0; r < fan_out; ++r) b[r] = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input, ForwardCache* cache) {
  if (input.rows() != net.input_size()) {
    throw ShapeError("forward: input has " + std::to_string(input.rows()) + " rows, net expects " +
                     std::to_string(net.input_size()));
  }
  const int layers = net.layer_count();
  Eigen::MatrixXd a = input;
  if (cache != nullptr) {
    cache->acts.assign(1, a);
    cache->pre.clear();
  }
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (net.weights[l] * a).colwise() + net.biases[l];
    if (l + 1 < layers) {
      a = z.cwiseMax(0.0);
    } else if (net.head == Mlp::Head::kTanh) {
      a = z.array().tanh().matrix();
    } else {
      a = z;
    }
    if (cache != nullptr) {
      cache->pre.push_back(std::move(z));
      cache->acts.push_back(a);
    }
  }
  return a;
}

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& input) {
  return forward(net, Eigen::MatrixXd(input), nullptr).col(0);
}

Eigen::MatrixXd backward(const Mlp& net, const ForwardCache& cache,
                         const Eigen::MatrixXd& d_output, MlpGrads* grads) {
  const int layers = net.layer_count();
  if (static_cast<int>(cache.acts.size()) != layers + 1 ||
      static_cast<int>(cache.pre.size()) != layers) {
    throw ShapeError("backward: stale or foreign forward cache");
  }
  if (d_output.rows() != net.output_size() || d_output.cols() != cache.acts.back().cols()) {
    throw ShapeError("backward: d_output shape does not match cached forward");
  }
  for (int l = 0; l < layers; ++l) {
    if (cache.acts[l].rows() != net.layer_sizes[l]) {
      throw ShapeError("backward: cache does not match net layer sizes");
    }
  }

  if (grads != nullptr) {
    grads->d_weights.assign(layers, Eigen::MatrixXd());
    grads->d_biases.assign(layers, Eigen::VectorXd());
  }

  Eigen::MatrixXd dz;
  if (net.head == Mlp::Head::kTanh) {
    dz = d_output.cwiseProduct(
        (1.0 - cache.acts.back().array().square()).matrix());
  } else {
    dz = d_output;
  }
  Eigen::MatrixXd d_input;
  for (int l = layers - 1; l >= 0; --l) {
    if (grads != nullptr) {
      grads->d_weights[l] = dz * cache.acts[l].transpose();
      grads->d_biases[l] = dz.rowwise().sum();
    }
    Eigen::MatrixXd dprev = net.weights[l].transpose() * dz;
    if (l > 0) {
      dz = dprev.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
    } else {
      d_input = std::move(dprev);
    }
  }
  return d_input;
}

AdamState make_adam(const Mlp& net, double lr) {
  AdamState opt;
  opt.lr = lr;
  for (int l = 0; l < net.layer_count(); ++l) {
    opt.m_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    opt.v_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    opt.m_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    opt.v_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return opt;
}

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& opt) {
  const int layers = net.layer_count();
  if (static_cast<int>(grads.d_weights.size()) != layers ||
      static_cast<int>(opt.m_w.size()) != layers) {
    throw ShapeError("adam_step: gradient/optimizer state does not match net");
  }
  opt.step += 1;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  for (int l = 0; l < layers; ++l) {
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
      m = opt.beta1 * m + (1.0 - opt.beta1) * grad;
      v = (opt.beta2 * v.array() + (1.0 - opt.beta2) * grad.array().square()).matrix();
      param.array() -=
          opt.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + opt.eps);
    };
    update(net.weights[l], grads.d_weights[l], opt.m_w[l], opt.v_w[l]);
    update(net.biases[l], grads.d_biases[l], opt.m_b[l], opt.v_b[l]);
  }
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  if (target.layer_sizes != source.layer_sizes) {
    throw ShapeError("soft_update: target and source shapes differ");
  }
  for (int l = 0; l < target.layer_count(); ++l) {
    target.weights[l] = tau * source.weights[l] + (1.0 - tau) * target.weights[l];
    target.biases[l] = tau * source.biases[l] + (1.0 - tau) * target.biases[l];
  }
}

}  // namespace safe_manip
