#include "nondecomp/optimizers.hpp"

#include "nondecomp/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace nondecomp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

OptStepper make_stepper(StepKind kind, double eta) {
  OptStepper stepper;
  stepper.kind = kind;
  stepper.eta = eta;
  return stepper;
}

void require_both_classes(const Dataset& ds) {
  const long pos = ds.count_positives();
  if (pos == 0 || pos == ds.n()) {
    throw DomainError("training data must contain both classes");
  }
}

bool eval_due(long iter, long total, long every) {
  if (iter == total) return true;
  return every > 0 && iter % every == 0;
}

}  // namespace

TraceRecord::TraceRecord()
    : alpha(kNaN), beta(kNaN), gamma1(kNaN), gamma2(kNaN), level_v(kNaN) {}

void TrainConfig::validate() const {
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (batch < 1) throw ConfigError("batch size must be >= 1");
  if (iters < 1) throw ConfigError("iteration budget must be >= 1");
  if (inner_iters < 1) throw ConfigError("inner budget must be >= 1");
  if (primal_reward != RewardKind::sigmoid) {
    throw ConfigError("primal reward must be the sigmoid surrogate");
  }
  if (pretrain_epochs < 0) throw ConfigError("pretrain epochs must be >= 0");
}

Vector score_batch(const DampSplit& split, const Matrix& X) {
  return score_batch(split.upper, forward_batch(split.lower, X));
}

// ---------------------------------------------------------------------------
// Objectives.
// ---------------------------------------------------------------------------
namespace objectives {

Vector example_coefficients(const Vector& y, const ClassPriors& priors,
                            double cpos, double cneg) {
  priors.validate();
  const double b = static_cast<double>(y.size());
  Vector c(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    c[i] = y[i] > 0.0 ? cpos / (b * priors.p) : cneg / (b * (1.0 - priors.p));
  }
  return c;
}

double augmented_value(const Model& model, const Matrix& X, const Vector& y,
                       const ClassPriors& priors, double cpos, double cneg) {
  const auto [p_hat, n_hat] = sample_averages(RewardKind::sigmoid, priors,
                                              model, X, y);
  return cpos * p_hat + cneg * n_hat;
}

GradientBuffer augmented_gradient(const Model& model, const Matrix& X,
                                  const Vector& y, const ClassPriors& priors,
                                  double cpos, double cneg) {
  return backward_weighted_rewards(
      model, X, y, example_coefficients(y, priors, cpos, cneg),
      RewardKind::sigmoid);
}

double ce_value(const Model& model, const Matrix& X, const Vector& y) {
  const Vector scores = score_batch(model, X);
  double total = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double z = y[i] * scores[i];
    total += z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  }
  return total / static_cast<double>(y.size());
}

GradientBuffer ce_gradient(const Model& model, const Matrix& X,
                           const Vector& y) {
  const ForwardCache cache = forward_cache(model, X);
  const Vector scores = cache.output().col(0);
  const double b = static_cast<double>(y.size());
  Matrix upstream(y.size(), 1);
  for (Index i = 0; i < y.size(); ++i) {
    const double r = reward(RewardKind::sigmoid, scores[i], y[i]);
    upstream(i, 0) = -y[i] * (1.0 - r) / b;
  }
  return backward_from_cache(model, cache, upstream);
}

double valuation_value(const Model& model, const Matrix& X, const Vector& y,
                       const ClassPriors& priors, const PseudolinearCoeffs& c,
                       double level) {
  return (c.a[0] - level * c.b[0]) +
         augmented_value(model, X, y, priors, c.a[1] - level * c.b[1],
                         c.a[2] - level * c.b[2]);
}

GradientBuffer valuation_gradient(const Model& model, const Matrix& X,
                                  const Vector& y, const ClassPriors& priors,
                                  const PseudolinearCoeffs& c, double level) {
  return augmented_gradient(model, X, y, priors, c.a[1] - level * c.b[1],
                            c.a[2] - level * c.b[2]);
}

double struct_value(const Model& model, const Matrix& X, const Vector& y,
                    const Vector& ytilde, double C, double delta_const) {
  const Vector scores = score_batch(model, X);
  const double b = static_cast<double>(y.size());
  double lin = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    lin += (ytilde[i] - y[i]) * scores[i];
  }
  double sq = 0.0;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    sq += model.weights[l].squaredNorm() + model.biases[l].squaredNorm();
  }
  return 0.5 * sq + C * (delta_const + lin / b);
}

GradientBuffer struct_gradient(const Model& model, const Matrix& X,
                               const Vector& y, const Vector& ytilde,
                               double C) {
  const double b = static_cast<double>(y.size());
  Matrix upstream(y.size(), 1);
  for (Index i = 0; i < y.size(); ++i) {
    upstream(i, 0) = C * (ytilde[i] - y[i]) / b;
  }
  GradientBuffer g = backward(model, X, upstream);
  g.add_scaled(model_as_gradient(model), 1.0);
  return g;
}

}  // namespace objectives

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------

double eval_metric_scores(const MeasureSpec& measure, const Vector& scores,
                          const Vector& y, double threshold) {
  const ConfusionCounts c = confusion_from_scores(scores, y, threshold);
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConcaveLink>) {
          return link_value(m, tpr(c), tnr(c));
        } else if constexpr (std::is_same_v<T, PseudolinearCoeffs>) {
          return pseudolinear_value(m, tpr(c), tnr(c));
        } else {
          const double n = static_cast<double>(c.total());
          const double p_true = static_cast<double>(c.positives()) / n;
          const double p_est = static_cast<double>(c.tp + c.fp) / n;
          return kld({p_true, 1.0 - p_true}, {p_est, 1.0 - p_est},
                     m.epsilon_log);
        }
      },
      measure);
}

double eval_metric(const MeasureSpec& measure, const Model& model,
                   const Dataset& ds, double threshold) {
  return eval_metric_scores(measure, score_batch(model, ds.X), ds.y, threshold);
}

double eval_metric(const MeasureSpec& measure, const DampSplit& split,
                   const Dataset& ds, double threshold) {
  return eval_metric_scores(measure, score_batch(split, ds.X), ds.y,
                            threshold);
}

bool metric_is_loss(const MeasureSpec& measure) {
  return std::holds_alternative<NestedMeasure>(measure);
}

// ---------------------------------------------------------------------------
// Trainers.
// ---------------------------------------------------------------------------

namespace {

struct Tracer {
  const MeasureSpec& measure;
  const Dataset& train;
  const Dataset& test;
  const TrainConfig& cfg;
  Clock::time_point start = Clock::now();

  TraceRecord make(long iter, long samples, double grad_norm,
                   const Vector& train_scores, const Vector& test_scores) {
    TraceRecord rec;
    rec.iter = iter;
    rec.samples = samples;
    rec.wall_ms = elapsed_ms(start);
    rec.grad_norm = grad_norm;
    rec.train_metric = eval_metric_scores(measure, train_scores, train.y);
    rec.test_metric = eval_metric_scores(measure, test_scores, test.y);
    return rec;
  }

  TraceRecord make(long iter, long samples, double grad_norm,
                   const Model& model) {
    return make(iter, samples, grad_norm, score_batch(model, train.X),
                score_batch(model, test.X));
  }
};

void abort_trace(TrainTrace& trace, long iter, const char* what) {
  trace.aborted = true;
  trace.abort_reason =
      std::string(what) + " at iteration " + std::to_string(iter);
}

}  // namespace

TrainResult dspade_train(const Dataset& train, const Dataset& test,
                         const NetworkConfig& net, const ConcaveLink& link,
                         const TrainConfig& cfg, const Model* init) {
  cfg.validate();
  require_both_classes(train);
  const ClassPriors priors = ClassPriors::empirical(train);
  const MeasureSpec measure = link;

  TrainResult out{init != nullptr ? *init : nn_init(net), {}};
  OptStepper stepper = make_stepper(cfg.stepper, cfg.eta);
  MinibatchStream batches(train, cfg.batch, mix_seed(cfg.seed, 0xB),
                          cfg.stratified_batches);
  RewardStats stats;
  double alpha = 0.0, beta = 0.0;
  if (cfg.freeze_duals) {
    alpha = (*cfg.freeze_duals)[0];
    beta = (*cfg.freeze_duals)[1];
  }
  Tracer tracer{measure, train, test, cfg};

  for (long t = 1; t <= cfg.iters; ++t) {
    const auto [X, yb] = gather(train, batches.next());
    const double alpha_used = alpha, beta_used = beta;
    const GradientBuffer grad =
        objectives::augmented_gradient(out.model, X, yb, priors, alpha, beta);
    if (!grad.all_finite()) {
      abort_trace(out.trace, t, "non-finite primal gradient");
      break;
    }
    out.model = step(stepper, out.model, grad, StepDirection::ascent);
    out.trace.samples_consumed += cfg.batch;

    const Vector scores = score_batch(out.model, X);
    const auto summary = batch_reward_summary(cfg.dual_reward, scores, yb);
    if (summary.frac_pos == 0.0 || summary.frac_neg == 0.0) {
      ++out.trace.skipped_dual_updates;  // that side's accumulators hold
    }
    accumulate(stats, summary);
    if (!cfg.freeze_duals && stats.has_both_classes()) {
      const Vector2 d =
          dual_step(link, stats.tpr_estimate(), stats.tnr_estimate());
      alpha = d[0];
      beta = d[1];
    }

    if (eval_due(t, cfg.iters, cfg.eval_every)) {
      TraceRecord rec =
          tracer.make(t, out.trace.samples_consumed, grad.norm(), out.model);
      rec.alpha = alpha_used;
      rec.beta = beta_used;
      out.trace.records.push_back(rec);
    }
  }
  return out;
}

TrainResult dnemsis_train(const Dataset& train, const Dataset& test,
                          const NetworkConfig& net, const NestedMeasure& m,
                          const TrainConfig& cfg, const Model* init) {
  cfg.validate();
  require_both_classes(train);
  const ClassPriors priors = ClassPriors::empirical(train);
  const MeasureSpec measure = m;

  TrainResult out{init != nullptr ? *init : nn_init(net), {}};
  OptStepper stepper = make_stepper(cfg.stepper, cfg.eta);
  MinibatchStream batches(train, cfg.batch, mix_seed(cfg.seed, 0xB),
                          cfg.stratified_batches);

  Vector2 r = Vector2::Zero();
  Vector2 q = Vector2::Zero();
  NestedDuals duals;  // zero duals; conjugates of the zero dual are analytic
  const Vector2 conj0 = m.conjugates_at_zero();
  duals.zeta1_conj = conj0[0];
  duals.zeta2_conj = conj0[1];
  Tracer tracer{measure, train, test, cfg};

  for (long t = 1; t <= cfg.iters; ++t) {
    const auto [X, yb] = gather(train, batches.next());
    const double coef_p =
        duals.gamma[0] * duals.alpha[0] + duals.gamma[1] * duals.beta[0];
    const double coef_n =
        duals.gamma[0] * duals.alpha[1] + duals.gamma[1] * duals.beta[1];
    const GradientBuffer grad =
        objectives::augmented_gradient(out.model, X, yb, priors, coef_p,
                                       coef_n);
    if (!grad.all_finite()) {
      abort_trace(out.trace, t, "non-finite primal gradient");
      break;
    }
    out.model = step(stepper, out.model, grad, StepDirection::ascent);
    out.trace.samples_consumed += cfg.batch;

    const Vector scores = score_batch(out.model, X);
    // Batch sums are divided by b so the running means are batch-size
    // invariant; rewards carry the 1/p factors so s surrogates (TPR, TNR).
    const auto [p_hat, n_hat] =
        sample_averages_from_scores(cfg.dual_reward, priors, scores, yb);
    const Vector2 s{p_hat, n_hat};
    const double td = static_cast<double>(t);
    const Vector2 estimate{duals.alpha.dot(s) - duals.zeta1_conj,
                           duals.beta.dot(s) - duals.zeta2_conj};
    q = ((td - 1.0) * q + estimate) / td;
    r = ((td - 1.0) * r + s) / td;
    if (m.floors(r[0], r[1])) ++out.trace.floored_events;
    duals = nested_dual_steps(m, r, q);

    if (eval_due(t, cfg.iters, cfg.eval_every)) {
      TraceRecord rec =
          tracer.make(t, out.trace.samples_consumed, grad.norm(), out.model);
      rec.alpha = coef_p;
      rec.beta = coef_n;
      rec.gamma1 = duals.gamma[0];
      rec.gamma2 = duals.gamma[1];
      out.trace.records.push_back(rec);
    }
  }
  return out;
}

DampResult damp_train(const Dataset& train, const Dataset& test,
                      const NetworkConfig& lower_net,
                      const NetworkConfig& upper_net,
                      const PseudolinearCoeffs& coeffs,
                      const TrainConfig& cfg) {
  cfg.validate();
  require_both_classes(train);
  if (lower_net.output_dim() != upper_net.input_dim) {
    throw ConfigError("stacked networks disagree on the interface width");
  }
  if (upper_net.output_dim() != 1) {
    throw ConfigError("upper network must emit a single score");
  }
  const ClassPriors priors = ClassPriors::empirical(train);
  const MeasureSpec measure = coeffs;

  DampResult out{{nn_init(lower_net), nn_init(upper_net)}, {}};
  Model& lower = out.split.lower;
  Model& upper = out.split.upper;
  Tracer tracer{measure, train, test, cfg};

  // Phase 1: cross-entropy pretrain of the stacked pair.
  {
    OptStepper step_lower = make_stepper(cfg.stepper, cfg.eta);
    OptStepper step_upper = make_stepper(cfg.stepper, cfg.eta);
    MinibatchStream batches(train, cfg.batch, mix_seed(cfg.seed, 0xCE),
                            cfg.stratified_batches);
    const long pre_iters = cfg.pretrain_epochs * batches.batches_per_epoch();
    for (long it = 1; it <= pre_iters; ++it) {
      const auto [X, yb] = gather(train, batches.next());
      const ForwardCache lower_cache = forward_cache(lower, X);
      const ForwardCache upper_cache =
          forward_cache(upper, lower_cache.output());
      const Vector scores = upper_cache.output().col(0);
      Matrix upstream(yb.size(), 1);
      const double b = static_cast<double>(yb.size());
      for (Index i = 0; i < yb.size(); ++i) {
        const double rw = reward(RewardKind::sigmoid, scores[i], yb[i]);
        upstream(i, 0) = -yb[i] * (1.0 - rw) / b;
      }
      Matrix d_features;
      const GradientBuffer g_upper =
          backward_from_cache(upper, upper_cache, upstream, &d_features);
      const GradientBuffer g_lower =
          backward_from_cache(lower, lower_cache, d_features);
      if (!g_upper.all_finite() || !g_lower.all_finite()) {
        abort_trace(out.trace, it, "non-finite pretrain gradient");
        return out;
      }
      upper = step(step_upper, upper, g_upper, StepDirection::descent);
      lower = step(step_lower, lower, g_lower, StepDirection::descent);
      out.trace.samples_consumed += cfg.batch;
    }
  }

  // Phase 2: freeze the lower network, materialize its features, and
  // alternate level estimation with inner ascent on the valuation.
  const Dataset tilde = make_dataset(forward_batch(lower, train.X), train.y,
                                     train.name + "~features");
  MinibatchStream level_batches(tilde, cfg.batch, mix_seed(cfg.seed, 0x1E),
                                cfg.stratified_batches);
  MinibatchStream inner_batches(tilde, cfg.batch, mix_seed(cfg.seed, 0x17),
                                cfg.stratified_batches);
  OptStepper stepper = make_stepper(cfg.stepper, cfg.eta);
  double level = 0.0;
  for (long t = 1; t <= cfg.iters; ++t) {
    const auto [Xl, yl] = gather(tilde, level_batches.next());
    out.trace.samples_consumed += cfg.batch;
    try {
      const auto [u, v] =
          sample_averages_from_scores(RewardKind::sigmoid, priors,
                                      score_batch(upper, Xl), yl);
      level = pseudolinear_value(coeffs, u, v);
    } catch (const DomainError&) {
      ++out.trace.level_clamps;  // keep the previous level
    }

    double last_norm = 0.0;
    bool failed = false;
    for (long tp = 1; tp <= cfg.inner_iters; ++tp) {
      const auto [Xi, yi] = gather(tilde, inner_batches.next());
      const GradientBuffer grad = objectives::valuation_gradient(
          upper, Xi, yi, priors, coeffs, level);
      if (!grad.all_finite()) {
        abort_trace(out.trace, t, "non-finite valuation gradient");
        failed = true;
        break;
      }
      upper = step(stepper, upper, grad, StepDirection::ascent);
      out.trace.samples_consumed += cfg.batch;
      last_norm = grad.norm();
    }
    if (failed) break;

    if (eval_due(t, cfg.iters, cfg.eval_every)) {
      TraceRecord rec = tracer.make(t, out.trace.samples_consumed, last_norm,
                                    score_batch(out.split, train.X),
                                    score_batch(out.split, test.X));
      rec.level_v = level;
      out.trace.records.push_back(rec);
    }
  }
  return out;
}

TrainResult ce_train(const Dataset& train, const Dataset& test,
                     const NetworkConfig& net, const TrainConfig& cfg,
                     const MeasureSpec& eval_measure) {
  cfg.validate();
  require_both_classes(train);
  TrainResult out{nn_init(net), {}};
  OptStepper stepper = make_stepper(cfg.stepper, cfg.eta);
  MinibatchStream batches(train, cfg.batch, mix_seed(cfg.seed, 0xB),
                          cfg.stratified_batches);
  Tracer tracer{eval_measure, train, test, cfg};
  for (long t = 1; t <= cfg.iters; ++t) {
    const auto [X, yb] = gather(train, batches.next());
    const GradientBuffer grad = objectives::ce_gradient(out.model, X, yb);
    if (!grad.all_finite()) {
      abort_trace(out.trace, t, "non-finite cross-entropy gradient");
      break;
    }
    out.model = step(stepper, out.model, grad, StepDirection::descent);
    out.trace.samples_consumed += cfg.batch;
    if (eval_due(t, cfg.iters, cfg.eval_every)) {
      out.trace.records.push_back(
          tracer.make(t, out.trace.samples_consumed, grad.norm(), out.model));
    }
  }
  return out;
}

double plugin_tune(
    const Vector& scores, const Vector& y,
    const std::function<double(const ConfusionCounts&)>& metric) {
  if (scores.size() == 0) throw DomainError("plugin_tune: empty validation");
  std::vector<double> sorted(scores.data(), scores.data() + scores.size());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> candidates;
  candidates.push_back(sorted.front() - 1.0);
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  }
  candidates.push_back(sorted.back() + 1.0);

  double best_threshold = candidates.front();
  double best_value = -std::numeric_limits<double>::infinity();
  for (double threshold : candidates) {  // ascending; ties keep the smallest
    const double value = metric(confusion_from_scores(scores, y, threshold));
    if (value > best_value) {
      best_value = value;
      best_threshold = threshold;
    }
  }
  return best_threshold;
}

double plugin_tune(const Model& model, const Dataset& validation,
                   const MeasureSpec& measure) {
  if (validation.n() == 0) throw DomainError("plugin_tune: empty validation");
  const Vector scores = score_batch(model, validation.X);
  auto metric = [&](const ConfusionCounts& c) {
    return std::visit(
        [&](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, ConcaveLink>) {
            return link_value(m, tpr(c), tnr(c));
          } else if constexpr (std::is_same_v<T, PseudolinearCoeffs>) {
            return pseudolinear_value(m, tpr(c), tnr(c));
          } else {
            const double n = static_cast<double>(c.total());
            const double p_true = static_cast<double>(c.positives()) / n;
            const double p_est = static_cast<double>(c.tp + c.fp) / n;
            return -kld({p_true, 1.0 - p_true}, {p_est, 1.0 - p_est},
                        m.epsilon_log);
          }
        },
        measure);
  };
  return plugin_tune(scores, validation.y, metric);
}

Vector most_violated_labeling(
    const Vector& scores, const Vector& y,
    const std::function<double(const ConfusionCounts&)>& delta) {
  const Index n = scores.size();
  if (y.size() != n) throw ShapeError("most_violated: size mismatch");
  std::vector<Index> pos, neg;
  for (Index i = 0; i < n; ++i) {
    (y[i] > 0.0 ? pos : neg).push_back(i);
  }
  auto by_score_desc = [&](Index a, Index b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::sort(pos.begin(), pos.end(), by_score_desc);
  std::sort(neg.begin(), neg.end(), by_score_desc);

  // prefix[i] = sum of the i highest scores within the class
  auto prefix_sums = [&](const std::vector<Index>& idx) {
    std::vector<double> pre(idx.size() + 1, 0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      pre[i + 1] = pre[i] + scores[idx[i]];
    }
    return pre;
  };
  const auto pre_pos = prefix_sums(pos);
  const auto pre_neg = prefix_sums(neg);
  double fixed = 0.0;  // -sum_i y_i s_i - sum_i s_i, constant in the labeling
  for (Index i = 0; i < n; ++i) fixed -= (1.0 + y[i]) * scores[i];

  const long np = static_cast<long>(pos.size());
  const long nn = static_cast<long>(neg.size());
  double best = -std::numeric_limits<double>::infinity();
  long best_i = 0, best_j = 0;
  for (long i = 0; i <= np; ++i) {
    for (long j = 0; j <= nn; ++j) {
      const ConfusionCounts c{i, np - i, j, nn - j};
      // sum (yhat - y) s for the top-i/top-j selection
      const double obj = delta(c) + fixed +
                         2.0 * (pre_pos[static_cast<std::size_t>(i)] +
                                pre_neg[static_cast<std::size_t>(j)]);
      if (obj > best) {  // strict: ties prefer fewer predicted positives
        best = obj;
        best_i = i;
        best_j = j;
      }
    }
  }
  Vector labeling = Vector::Constant(n, -1.0);
  for (long i = 0; i < best_i; ++i) labeling[pos[static_cast<std::size_t>(i)]] = 1.0;
  for (long j = 0; j < best_j; ++j) labeling[neg[static_cast<std::size_t>(j)]] = 1.0;
  return labeling;
}

TrainResult struct_ann_train(
    const Dataset& train, const Dataset& test, const NetworkConfig& net,
    const std::function<double(const ConfusionCounts&)>& delta,
    const MeasureSpec& eval_measure, const TrainConfig& cfg) {
  cfg.validate();
  require_both_classes(train);
  TrainResult out{nn_init(net), {}};
  OptStepper stepper = make_stepper(cfg.stepper, cfg.eta);
  MinibatchStream batches(train, cfg.batch, mix_seed(cfg.seed, 0xB),
                          cfg.stratified_batches);
  Tracer tracer{eval_measure, train, test, cfg};
  for (long t = 1; t <= cfg.iters; ++t) {
    const auto [X, yb] = gather(train, batches.next());
    const Vector scores = score_batch(out.model, X);
    const Vector ytilde = most_violated_labeling(scores, yb, delta);
    const GradientBuffer grad =
        objectives::struct_gradient(out.model, X, yb, ytilde, cfg.struct_c);
    if (!grad.all_finite()) {
      abort_trace(out.trace, t, "non-finite structured gradient");
      break;
    }
    out.model = step(stepper, out.model, grad, StepDirection::descent);
    out.trace.samples_consumed += cfg.batch;
    if (eval_due(t, cfg.iters, cfg.eval_every)) {
      out.trace.records.push_back(
          tracer.make(t, out.trace.samples_consumed, grad.norm(), out.model));
    }
  }
  return out;
}

StabilityReport stability_report(const TrainTrace& trace, double epsilon) {
  StabilityReport report;
  const auto& recs = trace.records;
  if (recs.empty()) return report;
  report.running_min.reserve(recs.size());
  double running = std::numeric_limits<double>::infinity();
  for (const auto& rec : recs) {
    if (!report.first_stable_iter && rec.grad_norm <= epsilon) {
      report.first_stable_iter = rec.iter;
    }
    running = std::min(running, rec.grad_norm);
    report.running_min.push_back(running);
  }
  const std::size_t k = recs.size();
  const std::size_t decile = std::max<std::size_t>(1, k / 10);
  auto window_min = [&](std::size_t from, std::size_t to) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = from; i < to; ++i) {
      m = std::min(m, recs[i].grad_norm);
    }
    return m;
  };
  report.first_decile_min = window_min(0, decile);
  report.last_decile_min = window_min(k - decile, k);
  report.decile_ratio = report.first_decile_min > 0.0
                            ? report.last_decile_min / report.first_decile_min
                            : 0.0;
  report.stabilizing = report.decile_ratio <= 1.0;
  return report;
}

}  // namespace nondecomp
