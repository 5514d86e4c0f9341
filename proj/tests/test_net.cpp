#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nondecomp/net.hpp"
#include "nondecomp/rng.hpp"

#include <cmath>

using namespace nondecomp;

namespace {

NetworkConfig small_net(Index d_in, std::vector<Index> layers,
                        std::uint64_t seed,
                        Activation act = Activation::relu) {
  NetworkConfig cfg;
  cfg.input_dim = d_in;
  cfg.layer_sizes = std::move(layers);
  cfg.hidden_activation = act;
  cfg.init_seed = seed;
  return cfg;
}

bool models_identical(const Model& a, const Model& b) {
  if (a.num_layers() != b.num_layers()) return false;
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    if (a.weights[l] != b.weights[l]) return false;
    if (a.biases[l] != b.biases[l]) return false;
  }
  return true;
}

Model random_model(Rng& rng, Index d_in, const std::vector<Index>& layers,
                   Activation act = Activation::tanh) {
  Model m = nn_init(small_net(d_in, layers, rng.bits(), act));
  // shift away from the tiny init so gradients are not degenerate
  for (auto& w : m.weights) {
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) w(r, c) += 0.3 * rng.normal();
    }
  }
  for (auto& b : m.biases) {
    for (Index r = 0; r < b.size(); ++r) b[r] += 0.3 * rng.normal();
  }
  return m;
}

}  // namespace

TEST_CASE("nn_init shapes, determinism and seed sensitivity") {
  const Model single = nn_init(small_net(2, {1}, 7));
  CHECK(single.num_layers() == 1);
  CHECK(single.weights[0].rows() == 1);
  CHECK(single.weights[0].cols() == 2);
  CHECK(single.biases[0].size() == 1);
  CHECK(single.biases[0][0] == 0.0);
  CHECK(models_identical(single, nn_init(small_net(2, {1}, 7))));

  const Model a = nn_init(small_net(3, {4, 1}, 7));
  const Model b = nn_init(small_net(3, {4, 1}, 7));
  CHECK(models_identical(a, b));

  const Model c = nn_init(small_net(3, {4, 1}, 8));
  CHECK_FALSE(models_identical(a, c));

  // uniform in [-s, s], s = init_scale / sqrt(fan_in)
  const double s0 = 1.0 / std::sqrt(3.0);
  CHECK(a.weights[0].cwiseAbs().maxCoeff() <= s0);
}

TEST_CASE("nn_init rejects bad dimensions") {
  CHECK_THROWS_AS(nn_init(small_net(0, {1}, 7)), ConfigError);
  CHECK_THROWS_AS(nn_init(small_net(2, {}, 7)), ConfigError);
  CHECK_THROWS_AS(nn_init(small_net(2, {0}, 7)), ConfigError);
}

TEST_CASE("score: zero weights, dot product, hand-checked relu net") {
  Model zero = nn_init(small_net(3, {1}, 1));
  zero.weights[0].setZero();
  CHECK(score(zero, Vector::Constant(3, 2.5)) == 0.0);

  Model linear = nn_init(small_net(2, {1}, 1));
  linear.weights[0] << 2.0, -1.0;
  linear.biases[0] << 0.5;
  Vector x(2);
  x << 1.0, 1.0;
  CHECK(score(linear, x) == doctest::Approx(1.5).epsilon(1e-12));

  // by hand: z1 = [1*1 - 1*2, 0.5*1 + 2*2 - 1] = [-1, 3.5]
  //          relu -> [0, 3.5]; out = 0 + 3.5 + 0.5 = 4
  Model relu2 = nn_init(small_net(2, {2, 1}, 1, Activation::relu));
  relu2.weights[0] << 1.0, -1.0, 0.5, 2.0;
  relu2.biases[0] << 0.0, -1.0;
  relu2.weights[1] << 1.0, 1.0;
  relu2.biases[1] << 0.5;
  Vector x2(2);
  x2 << 1.0, 2.0;
  CHECK(score(relu2, x2) == doctest::Approx(4.0).epsilon(1e-12));

  Vector wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(score(relu2, wrong), ShapeError);
}

TEST_CASE("backward_weighted_rewards: zero coefficients, linearity, FD") {
  Rng rng(11);
  const Model m = random_model(rng, 3, {4, 1});
  Matrix X(2, 3);
  X << 0.3, -0.5, 1.1, -0.2, 0.8, 0.4;
  Vector y(2);
  y << 1.0, -1.0;

  SUBCASE("all-zero coefficients give a zero gradient") {
    const auto g = backward_weighted_rewards(m, X, y, Vector::Zero(2),
                                             RewardKind::sigmoid);
    CHECK(g.norm() == 0.0);
  }

  SUBCASE("zero_one reward is rejected in the primal path") {
    CHECK_THROWS_AS(backward_weighted_rewards(m, X, y, Vector::Ones(2),
                                              RewardKind::zero_one),
                    NumericError);
  }

  SUBCASE("single point matches central finite differences") {
    const Matrix X1 = X.topRows(1);
    const Vector y1 = y.head(1);
    const auto g =
        backward_weighted_rewards(m, X1, y1, Vector::Ones(1),
                                  RewardKind::sigmoid);
    const auto objective = [&](const Model& probe) {
      return reward(RewardKind::sigmoid, score(probe, X1.row(0).transpose()),
                    y1[0]);
    };
    CHECK(grad_check(m, objective, g, 1e-5) <= 1e-4);
  }

  SUBCASE("batch gradient is the sum of per-example gradients") {
    Vector c(2);
    c << 0.7, -1.3;
    auto g_batch = backward_weighted_rewards(m, X, y, c, RewardKind::sigmoid);
    auto g_sum = backward_weighted_rewards(m, X.topRows(1), y.head(1),
                                           c.head(1), RewardKind::sigmoid);
    g_sum.add_scaled(backward_weighted_rewards(m, X.bottomRows(1), y.tail(1),
                                               c.tail(1), RewardKind::sigmoid),
                     1.0);
    g_batch.add_scaled(g_sum, -1.0);
    CHECK(g_batch.norm() <= 1e-12);
  }

  SUBCASE("homogeneous in the coefficients") {
    Vector c = Vector::Ones(2);
    auto g1 = backward_weighted_rewards(m, X, y, c, RewardKind::sigmoid);
    auto g3 = backward_weighted_rewards(m, X, y, Vector(3.0 * c),
                                        RewardKind::sigmoid);
    g1.scale(3.0);
    g3.add_scaled(g1, -1.0);
    CHECK(g3.norm() <= 1e-12);
  }
}

TEST_CASE("grad_check on the exact quadratic ||w||^2 / 2") {
  Rng rng(5);
  const Model m = random_model(rng, 2, {3, 1});
  const auto objective = [](const Model& probe) {
    double s = 0.0;
    for (std::size_t l = 0; l < probe.weights.size(); ++l) {
      s += probe.weights[l].squaredNorm() + probe.biases[l].squaredNorm();
    }
    return 0.5 * s;
  };
  CHECK(grad_check(m, objective, model_as_gradient(m), 1e-5) <= 1e-8);
}

TEST_CASE("grad_check flags a non-finite objective") {
  const Model m = nn_init(small_net(2, {1}, 3));
  const auto objective = [](const Model&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(grad_check(m, objective, model_as_gradient(m), 1e-5),
                  NumericError);
}

TEST_CASE("step: sgd ascent, zero gradients, adam first step") {
  Model m = nn_init(small_net(1, {1}, 1));
  m.weights[0](0, 0) = 1.0;
  m.biases[0][0] = 0.0;

  GradientBuffer g = GradientBuffer::zeros_like(m);
  g.weights[0](0, 0) = 2.0;

  SUBCASE("constant step ascent: 1 + 0.1 * 2 = 1.2") {
    OptStepper sgd;
    sgd.kind = StepKind::constant_sgd;
    sgd.eta = 0.1;
    const Model next = step(sgd, m, g, StepDirection::ascent);
    CHECK(next.weights[0](0, 0) == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(sgd.t == 1);
  }

  SUBCASE("zero gradient leaves both steppers in place") {
    const GradientBuffer zero = GradientBuffer::zeros_like(m);
    OptStepper sgd;
    sgd.kind = StepKind::constant_sgd;
    sgd.eta = 0.1;
    CHECK(models_identical(step(sgd, m, zero, StepDirection::ascent), m));
    OptStepper adam;
    adam.kind = StepKind::adam;
    adam.eta = 0.1;
    CHECK(models_identical(step(adam, m, zero, StepDirection::descent), m));
  }

  SUBCASE("adam first-step magnitude is ~eta, independent of |g|") {
    for (double raw : {0.01, 3.0, 250.0}) {
      OptStepper adam;
    adam.kind = StepKind::adam;
    adam.eta = 0.1;
      GradientBuffer gg = GradientBuffer::zeros_like(m);
      gg.weights[0](0, 0) = raw;
      const Model next = step(adam, m, gg, StepDirection::ascent);
      const double delta = next.weights[0](0, 0) - 1.0;
      CHECK(delta == doctest::Approx(0.1).epsilon(1e-5));
    }
  }

  SUBCASE("non-finite gradient raises with iteration context") {
    OptStepper sgd;
    sgd.kind = StepKind::constant_sgd;
    sgd.eta = 0.1;
    GradientBuffer bad = GradientBuffer::zeros_like(m);
    bad.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(step(sgd, m, bad, StepDirection::ascent),
                         "step: non-finite gradient at iteration 1",
                         NumericError);
  }
}

TEST_CASE("backward through multi-output layers supports stacking") {
  Rng rng(21);
  const Model lower = random_model(rng, 3, {5, 2});
  const Model upper = random_model(rng, 2, {1});
  Matrix X(2, 3);
  X << 0.2, -0.4, 0.9, 1.2, 0.3, -0.7;

  // d/dw of sum over the batch of stacked scores, checked by FD on both nets
  const auto stacked_sum = [&](const Model& lo, const Model& up) {
    return score_batch(up, forward_batch(lo, X)).sum();
  };

  const ForwardCache lower_cache = forward_cache(lower, X);
  const ForwardCache upper_cache = forward_cache(upper, lower_cache.output());
  Matrix d_features;
  const GradientBuffer g_upper = backward_from_cache(
      upper, upper_cache, Matrix::Ones(2, 1), &d_features);
  const GradientBuffer g_lower =
      backward_from_cache(lower, lower_cache, d_features);

  const auto upper_obj = [&](const Model& probe) {
    return stacked_sum(lower, probe);
  };
  CHECK(grad_check(upper, upper_obj, g_upper, 1e-5) <= 1e-6);
  const auto lower_obj = [&](const Model& probe) {
    return stacked_sum(probe, upper);
  };
  CHECK(grad_check(lower, lower_obj, g_lower, 1e-5) <= 1e-6);
}

TEST_CASE("tanh and sigmoid activations also pass finite differences") {
  Rng rng(31);
  for (Activation act : {Activation::tanh, Activation::sigmoid}) {
    const Model m = random_model(rng, 4, {6, 3, 1}, act);
    Matrix X(3, 4);
    for (Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
    Vector y(3);
    y << 1.0, -1.0, 1.0;
    const Vector c = Vector::Constant(3, 0.5);
    const auto g = backward_weighted_rewards(m, X, y, c, RewardKind::sigmoid);
    const auto objective = [&](const Model& probe) {
      const Vector s = score_batch(probe, X);
      double total = 0.0;
      for (Index i = 0; i < 3; ++i) {
        total += c[i] * reward(RewardKind::sigmoid, s[i], y[i]);
      }
      return total;
    };
    CHECK(grad_check(m, objective, g, 1e-5) <= 1e-4);
  }
}
