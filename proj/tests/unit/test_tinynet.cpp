#include <doctest.h>

#include <cmath>

#include "safe_manip/errors.hpp"
#include "safe_manip/tinynet.hpp"
#include "test_util.hpp"

using namespace safe_manip;

namespace {

// Scalar loss L = sum of outputs; d_output = ones.
double loss_of(const Mlp& net, const Eigen::MatrixXd& input) {
  return forward(net, input).sum();
}

}  // namespace

TEST_CASE("initialization is seeded and bounded by fan-in") {
  Rng a(42), b(42), c(43);
  const Mlp na = make_mlp({4, 8, 2}, Mlp::Head::kTanh, a);
  const Mlp nb = make_mlp({4, 8, 2}, Mlp::Head::kTanh, b);
  const Mlp nc = make_mlp({4, 8, 2}, Mlp::Head::kTanh, c);
  CHECK(test_util::exact_eq(na.weights[0], nb.weights[0]));
  CHECK(test_util::exact_eq(na.biases[1], nb.biases[1]));
  CHECK_FALSE(test_util::exact_eq(na.weights[0], nc.weights[0]));
  CHECK(na.weights[0].cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(4.0));
  CHECK(na.weights[1].cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(8.0));
}

TEST_CASE("forward: relu hidden layers, tanh head bounds, batch = loop") {
  Rng rng(7);
  const Mlp net = make_mlp({3, 16, 16, 2}, Mlp::Head::kTanh, rng);
  Eigen::MatrixXd batch(3, 5);
  Rng data(99);
  for (int j = 0; j < 5; ++j) {
    for (int i = 0; i < 3; ++i) batch(i, j) = data.uniform(-2.0, 2.0);
  }
  const Eigen::MatrixXd out = forward(net, batch);
  REQUIRE(out.rows() == 2);
  REQUIRE(out.cols() == 5);
  CHECK(out.cwiseAbs().maxCoeff() < 1.0);
  for (int j = 0; j < 5; ++j) {
    const Eigen::VectorXd single = forward(net, Eigen::VectorXd(batch.col(j)));
    CHECK((single - out.col(j)).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("backward matches central finite differences") {
  const double h = 1e-5;
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(1000 + trial);
    const Mlp::Head head = trial % 2 == 0 ? Mlp::Head::kTanh : Mlp::Head::kIdentity;
    Mlp net = make_mlp({3, 6, 4, 2}, head, rng);
    Eigen::MatrixXd input(3, 2);
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 3; ++i) input(i, j) = rng.uniform(-1.5, 1.5);
    }
    ForwardCache cache;
    const Eigen::MatrixXd out = forward(net, input, &cache);
    MlpGrads grads;
    const Eigen::MatrixXd d_in =
        backward(net, cache, Eigen::MatrixXd::Ones(out.rows(), out.cols()), &grads);

    // Probe a handful of weight entries and one input entry per trial.
    for (int probe = 0; probe < 3; ++probe) {
      const int layer = static_cast<int>(rng.uniform_int(0, net.layer_count() - 1));
      const int r = static_cast<int>(rng.uniform_int(0, net.weights[layer].rows() - 1));
      const int col = static_cast<int>(rng.uniform_int(0, net.weights[layer].cols() - 1));
      const double saved = net.weights[layer](r, col);
      net.weights[layer](r, col) = saved + h;
      const double up = loss_of(net, input);
      net.weights[layer](r, col) = saved - h;
      const double down = loss_of(net, input);
      net.weights[layer](r, col) = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = grads.d_weights[layer](r, col);
      CHECK(std::abs(fd - an) <= 1e-4 * std::max(1.0, std::abs(fd)));
      ++checked;
    }
    {
      const double saved = input(1, 0);
      Eigen::MatrixXd pert = input;
      pert(1, 0) = saved + h;
      const double up = loss_of(net, pert);
      pert(1, 0) = saved - h;
      const double down = loss_of(net, pert);
      const double fd = (up - down) / (2.0 * h);
      CHECK(std::abs(fd - d_in(1, 0)) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
  CHECK(checked == 300);
}

TEST_CASE("backward rejects a cache of the wrong shape") {
  Rng rng(5);
  const Mlp net = make_mlp({3, 4, 2}, Mlp::Head::kIdentity, rng);
  ForwardCache cache;
  forward(net, Eigen::MatrixXd::Zero(3, 2), &cache);
  MlpGrads grads;
  CHECK_THROWS_AS(backward(net, cache, Eigen::MatrixXd::Zero(2, 3), &grads), ShapeError);
}

TEST_CASE("adam first step moves by -lr times the gradient sign") {
  // With zero state, m-hat / (sqrt(v-hat) + eps) = sign(g) at step 1, so
  // every parameter with nonzero gradient moves by exactly -lr (up to eps).
  // A single linear layer makes every gradient entry exactly 1 here.
  Rng rng(3);
  Mlp net = make_mlp({2, 1}, Mlp::Head::kIdentity, rng);
  const Mlp before = net;
  AdamState opt = make_adam(net, 0.1);
  MlpGrads grads;
  ForwardCache cache;
  forward(net, Eigen::MatrixXd::Ones(2, 1), &cache);
  backward(net, cache, Eigen::MatrixXd::Ones(1, 1), &grads);
  adam_step(net, grads, opt);
  CHECK(opt.step == 1);
  CHECK(grads.d_weights[0](0, 0) == 1.0);
  CHECK(grads.d_biases[0](0) == 1.0);
  const double moved_w = net.weights[0](0, 0) - before.weights[0](0, 0);
  const double moved_b = net.biases[0](0) - before.biases[0](0);
  CHECK(moved_w == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(moved_b == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("soft update blends and copies") {
  Rng r1(1), r2(2);
  Mlp target = make_mlp({2, 4, 1}, Mlp::Head::kIdentity, r1);
  const Mlp source = make_mlp({2, 4, 1}, Mlp::Head::kIdentity, r2);
  const double w_t = target.weights[0](0, 0);
  const double w_s = source.weights[0](0, 0);
  soft_update(target, source, 0.25);
  CHECK(target.weights[0](0, 0) == doctest::Approx(0.25 * w_s + 0.75 * w_t));
  soft_update(target, source, 1.0);
  CHECK(test_util::exact_eq(target.weights[0], source.weights[0]));
  CHECK(test_util::exact_eq(target.biases[1], source.biases[1]));
}
