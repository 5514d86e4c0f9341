#pragma once

#include "nondecomp/rewards.hpp"
#include "nondecomp/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace nondecomp {

enum class Activation { relu, tanh, sigmoid };

// Dense feed-forward architecture. The last entry of layer_sizes is the
// output dimension; the output is a raw score with no final squashing (the
// reward surrogate supplies the nonlinearity).
struct NetworkConfig {
  Index input_dim = 0;
  std::vector<Index> layer_sizes;
  Activation hidden_activation = Activation::relu;
  std::uint64_t init_seed = 0;
  double init_scale = 1.0;

  Index output_dim() const { return layer_sizes.back(); }
  void validate() const;  // throws ConfigError
};

struct Model {
  NetworkConfig config;
  std::vector<Matrix> weights;  // layer l: layer_sizes[l] x fan_in
  std::vector<Vector> biases;

  Index input_dim() const { return config.input_dim; }
  Index output_dim() const { return config.output_dim(); }
  std::size_t num_layers() const { return weights.size(); }
  Index num_params() const;
  bool all_finite() const;
};

// Shape-matched parameter gradients (or any shape-matched tangent).
struct GradientBuffer {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static GradientBuffer zeros_like(const Model& m);
  void set_zero();
  void add_scaled(const GradientBuffer& other, double factor);
  void scale(double factor);
  double squared_norm() const;
  double norm() const;
  bool all_finite() const;
  bool empty() const { return weights.empty(); }
};

// Deterministic initialization: weights uniform in [-s, s] with
// s = init_scale / sqrt(fan_in), biases zero. Same config + seed gives
// bit-identical models.
Model nn_init(const NetworkConfig& config);

// Layer activations for a batch (rows are examples). acts[0] is the input,
// acts[l+1] the post-activation output of layer l; the last layer is raw.
struct ForwardCache {
  std::vector<Matrix> acts;
  const Matrix& output() const { return acts.back(); }
};

ForwardCache forward_cache(const Model& model, const Matrix& X);
Matrix forward_batch(const Model& model, const Matrix& X);
Vector forward(const Model& model, Eigen::Ref<const Vector> x);

// Raw score f(x; w) of a single-output model.
double score(const Model& model, Eigen::Ref<const Vector> x);
Vector score_batch(const Model& model, const Matrix& X);

// Gradient of sum_{i,j} dLdOut(i, j) * out_j(x_i) with respect to the model
// parameters; optionally also with respect to the inputs (for stacked nets).
GradientBuffer backward(const Model& model, const Matrix& X,
                        const Matrix& dLdOut, Matrix* dLdX = nullptr);
GradientBuffer backward_from_cache(const Model& model,
                                   const ForwardCache& cache,
                                   const Matrix& dLdOut,
                                   Matrix* dLdX = nullptr);

// Gradient of sum_i coeff_i * r(f(x_i; w), y_i). Only the sigmoid reward is
// differentiable; requesting zero_one throws NumericError.
GradientBuffer backward_weighted_rewards(const Model& model, const Matrix& X,
                                         const Vector& y, const Vector& coeff,
                                         RewardKind kind);

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
double grad_check(const Model& model,
                  const std::function<double(const Model&)>& objective,
                  const GradientBuffer& analytic, double h);

enum class StepKind { constant_sgd, adam };
enum class StepDirection { ascent, descent };

struct OptStepper {
  StepKind kind = StepKind::constant_sgd;
  double eta = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long t = 0;

  GradientBuffer m;  // first moment, sized lazily
  GradientBuffer v;  // second moment
};

// constant_sgd: w +- eta * grad. adam: bias-corrected moment update applied
// in the requested direction. Throws NumericError (with the iteration
// counter) on a non-finite gradient.
Model step(OptStepper& stepper, const Model& model, const GradientBuffer& grad,
           StepDirection direction);

// Parameters of a model reinterpreted as a gradient buffer (weight decay).
GradientBuffer model_as_gradient(const Model& model);

}  // namespace nondecomp
