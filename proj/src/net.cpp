#include "nondecomp/net.hpp"

#include "nondecomp/rng.hpp"

#include <cmath>
#include <string>

namespace nondecomp {

void NetworkConfig::validate() const {
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  if (layer_sizes.empty()) throw ConfigError("layer_sizes must be non-empty");
  for (Index s : layer_sizes) {
    if (s < 1) throw ConfigError("layer sizes must be >= 1");
  }
  if (!(init_scale > 0.0)) throw ConfigError("init_scale must be positive");
}

Index Model::num_params() const {
  Index n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += weights[l].size() + biases[l].size();
  }
  return n;
}

bool Model::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

GradientBuffer GradientBuffer::zeros_like(const Model& m) {
  GradientBuffer g;
  g.weights.reserve(m.weights.size());
  g.biases.reserve(m.biases.size());
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    g.weights.push_back(Matrix::Zero(m.weights[l].rows(), m.weights[l].cols()));
    g.biases.push_back(Vector::Zero(m.biases[l].size()));
  }
  return g;
}

void GradientBuffer::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

void GradientBuffer::add_scaled(const GradientBuffer& other, double factor) {
  if (other.weights.size() != weights.size()) {
    throw ShapeError("gradient buffer layer count mismatch");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += factor * other.weights[l];
    biases[l] += factor * other.biases[l];
  }
}

void GradientBuffer::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
}

double GradientBuffer::squared_norm() const {
  double s = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    s += weights[l].squaredNorm() + biases[l].squaredNorm();
  }
  return s;
}

double GradientBuffer::norm() const { return std::sqrt(squared_norm()); }

bool GradientBuffer::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

Model nn_init(const NetworkConfig& config) {
  config.validate();
  Model m;
  m.config = config;
  Rng rng(config.init_seed);
  Index fan_in = config.input_dim;
  for (Index out : config.layer_sizes) {
    const double s = config.init_scale / std::sqrt(static_cast<double>(fan_in));
    Matrix w(out, fan_in);
    // fixed row-major fill order keeps initialization bit-reproducible
    for (Index r = 0; r < out; ++r) {
      for (Index c = 0; c < fan_in; ++c) {
        w(r, c) = rng.uniform(-s, s);
      }
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(Vector::Zero(out));
    fan_in = out;
  }
  return m;
}

namespace {

void apply_activation(Activation act, Matrix& z) {
  switch (act) {
    case Activation::relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::tanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::sigmoid:
      z = (1.0 + (-z.array()).exp()).inverse().matrix();
      break;
  }
}

// Derivative expressed through the post-activation value a.
Matrix activation_derivative(Activation act, const Matrix& a) {
  switch (act) {
    case Activation::relu:
      return (a.array() > 0.0).cast<double>().matrix();
    case Activation::tanh:
      return (1.0 - a.array().square()).matrix();
    case Activation::sigmoid:
      return (a.array() * (1.0 - a.array())).matrix();
  }
  throw ConfigError("unknown activation");
}

}  // namespace

ForwardCache forward_cache(const Model& model, const Matrix& X) {
  if (X.cols() != model.input_dim()) {
    throw ShapeError("forward: expected " + std::to_string(model.input_dim()) +
                     " features, got " + std::to_string(X.cols()));
  }
  ForwardCache cache;
  cache.acts.reserve(model.num_layers() + 1);
  cache.acts.push_back(X);
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    Matrix z = cache.acts.back() * model.weights[l].transpose();
    z.rowwise() += model.biases[l].transpose();
    if (l + 1 < model.num_layers()) {
      apply_activation(model.config.hidden_activation, z);
    }
    cache.acts.push_back(std::move(z));
  }
  return cache;
}

Matrix forward_batch(const Model& model, const Matrix& X) {
  return forward_cache(model, X).output();
}

Vector forward(const Model& model, Eigen::Ref<const Vector> x) {
  Matrix row = x.transpose();
  return forward_batch(model, row).row(0).transpose();
}

double score(const Model& model, Eigen::Ref<const Vector> x) {
  if (model.output_dim() != 1) {
    throw ShapeError("score: model output dimension is not 1");
  }
  if (!x.allFinite()) throw NumericError("score: non-finite input");
  return forward(model, x)[0];
}

Vector score_batch(const Model& model, const Matrix& X) {
  if (model.output_dim() != 1) {
    throw ShapeError("score_batch: model output dimension is not 1");
  }
  return forward_batch(model, X).col(0);
}

GradientBuffer backward_from_cache(const Model& model,
                                   const ForwardCache& cache,
                                   const Matrix& dLdOut, Matrix* dLdX) {
  const auto L = model.num_layers();
  if (dLdOut.rows() != cache.acts[0].rows() ||
      dLdOut.cols() != model.output_dim()) {
    throw ShapeError("backward: upstream gradient shape mismatch");
  }
  GradientBuffer g;
  g.weights.resize(L);
  g.biases.resize(L);
  Matrix delta = dLdOut;
  for (std::size_t l = L; l-- > 0;) {
    g.weights[l] = delta.transpose() * cache.acts[l];
    g.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Matrix prev = delta * model.weights[l];
      delta = prev.cwiseProduct(
          activation_derivative(model.config.hidden_activation, cache.acts[l]));
    } else if (dLdX != nullptr) {
      *dLdX = delta * model.weights[0];
    }
  }
  if (dLdX != nullptr && L == 0) *dLdX = dLdOut;
  return g;
}

GradientBuffer backward(const Model& model, const Matrix& X,
                        const Matrix& dLdOut, Matrix* dLdX) {
  const ForwardCache cache = forward_cache(model, X);
  return backward_from_cache(model, cache, dLdOut, dLdX);
}

GradientBuffer backward_weighted_rewards(const Model& model, const Matrix& X,
                                         const Vector& y, const Vector& coeff,
                                         RewardKind kind) {
  if (kind != RewardKind::sigmoid) {
    throw NumericError(
        "backward_weighted_rewards: zero_one reward is not differentiable");
  }
  if (X.rows() == 0) throw DomainError("backward_weighted_rewards: empty batch");
  if (y.size() != X.rows() || coeff.size() != X.rows()) {
    throw ShapeError("backward_weighted_rewards: batch size mismatch");
  }
  const ForwardCache cache = forward_cache(model, X);
  const Vector scores = cache.output().col(0);
  // d r_sigmoid / d f = y * r (1 - r)
  Matrix upstream(X.rows(), 1);
  for (Index i = 0; i < X.rows(); ++i) {
    const double r = reward(RewardKind::sigmoid, scores[i], y[i]);
    upstream(i, 0) = coeff[i] * y[i] * r * (1.0 - r);
  }
  return backward_from_cache(model, cache, upstream);
}

double grad_check(const Model& model,
                  const std::function<double(const Model&)>& objective,
                  const GradientBuffer& analytic, double h) {
  if (!(h > 0.0)) throw ConfigError("grad_check: h must be positive");
  double max_err = 0.0;
  Model probe = model;
  auto check_coord = [&](double& coord, double analytic_value) {
    const double saved = coord;
    coord = saved + h;
    const double f_plus = objective(probe);
    coord = saved - h;
    const double f_minus = objective(probe);
    coord = saved;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
      throw NumericError("grad_check: non-finite objective");
    }
    const double numeric = (f_plus - f_minus) / (2.0 * h);
    const double err = std::abs(analytic_value - numeric) /
                       std::max(1.0, std::abs(analytic_value));
    if (err > max_err) max_err = err;
  };
  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    for (Index r = 0; r < probe.weights[l].rows(); ++r) {
      for (Index c = 0; c < probe.weights[l].cols(); ++c) {
        check_coord(probe.weights[l](r, c), analytic.weights[l](r, c));
      }
    }
    for (Index r = 0; r < probe.biases[l].size(); ++r) {
      check_coord(probe.biases[l][r], analytic.biases[l][r]);
    }
  }
  return max_err;
}

namespace {

void ensure_moments(OptStepper& stepper, const Model& model) {
  if (stepper.m.empty()) {
    stepper.m = GradientBuffer::zeros_like(model);
    stepper.v = GradientBuffer::zeros_like(model);
  }
  if (stepper.m.weights.size() != model.weights.size()) {
    throw ShapeError("stepper moments do not match the model");
  }
}

}  // namespace

Model step(OptStepper& stepper, const Model& model, const GradientBuffer& grad,
           StepDirection direction) {
  if (grad.weights.size() != model.weights.size()) {
    throw ShapeError("step: gradient/model layer count mismatch");
  }
  if (!grad.all_finite()) {
    throw NumericError("step: non-finite gradient at iteration " +
                       std::to_string(stepper.t + 1));
  }
  stepper.t += 1;
  const double sign = direction == StepDirection::ascent ? 1.0 : -1.0;
  Model out = model;
  switch (stepper.kind) {
    case StepKind::constant_sgd: {
      for (std::size_t l = 0; l < out.weights.size(); ++l) {
        out.weights[l] += sign * stepper.eta * grad.weights[l];
        out.biases[l] += sign * stepper.eta * grad.biases[l];
      }
      break;
    }
    case StepKind::adam: {
      ensure_moments(stepper, model);
      const double bc1 = 1.0 - std::pow(stepper.beta1, stepper.t);
      const double bc2 = 1.0 - std::pow(stepper.beta2, stepper.t);
      for (std::size_t l = 0; l < out.weights.size(); ++l) {
        auto update = [&](Eigen::Ref<Matrix> w, Eigen::Ref<const Matrix> g,
                          Matrix& m, Matrix& v) {
          m = stepper.beta1 * m + (1.0 - stepper.beta1) * g;
          v = stepper.beta2 * v.array().matrix() +
              (1.0 - stepper.beta2) * g.array().square().matrix();
          const auto m_hat = m.array() / bc1;
          const auto v_hat = v.array() / bc2;
          w.array() +=
              sign * stepper.eta * m_hat / (v_hat.sqrt() + stepper.epsilon);
        };
        update(out.weights[l], grad.weights[l], stepper.m.weights[l],
               stepper.v.weights[l]);
        Matrix bm = stepper.m.biases[l];
        Matrix bv = stepper.v.biases[l];
        Matrix bw = out.biases[l];
        update(bw, Matrix(grad.biases[l]), bm, bv);
        out.biases[l] = bw.col(0);
        stepper.m.biases[l] = bm.col(0);
        stepper.v.biases[l] = bv.col(0);
      }
      break;
    }
  }
  return out;
}

GradientBuffer model_as_gradient(const Model& model) {
  GradientBuffer g;
  g.weights = model.weights;
  g.biases = model.biases;
  return g;
}

}  // namespace nondecomp
