#pragma once

#include "nondecomp/data.hpp"
#include "nondecomp/measures.hpp"
#include "nondecomp/net.hpp"
#include "nondecomp/rewards.hpp"
#include "nondecomp/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nondecomp {

struct TrainConfig {
  StepKind stepper = StepKind::constant_sgd;
  double eta = 0.1;
  Index batch = 64;
  long iters = 500;
  long inner_iters = 10;  // T' of the alternating method
  RewardKind primal_reward = RewardKind::sigmoid;  // must stay sigmoid
  RewardKind dual_reward = RewardKind::sigmoid;    // zero_one => "-NS" variant
  std::uint64_t seed = 0;
  long eval_every = 10;
  bool stratified_batches = false;
  long pretrain_epochs = 3;  // cross-entropy phase of the alternating method
  double struct_c = 1.0;     // structured-loss regularization constant

  // Test hook: pin (alpha, beta) instead of running dual steps.
  std::optional<std::array<double, 2>> freeze_duals;

  void validate() const;
};

// One evaluation record; quiet NaN marks columns an algorithm does not use.
struct TraceRecord {
  long iter = 0;
  long samples = 0;
  double wall_ms = 0.0;
  double train_metric = 0.0;
  double test_metric = 0.0;
  double grad_norm = 0.0;
  double alpha, beta;      // dual weights on the P / N surrogates
  double gamma1, gamma2;   // outer duals (nested method)
  double level_v;          // level sequence (alternating method)

  TraceRecord();
};

struct TrainTrace {
  std::vector<TraceRecord> records;
  bool aborted = false;
  std::string abort_reason;
  long samples_consumed = 0;
  long skipped_dual_updates = 0;  // minibatches missing a class
  long floored_events = 0;        // log-floor hits in the nested measure
  long level_clamps = 0;          // degenerate level batches (alternating)
};

struct TrainResult {
  Model model;
  TrainTrace trace;
};

// Frozen lower network and trainable upper network of the alternating method.
struct DampSplit {
  Model lower;  // d_in -> d_int
  Model upper;  // d_int -> 1
};

struct DampResult {
  DampSplit split;
  TrainTrace trace;
};

Vector score_batch(const DampSplit& split, const Matrix& X);

// ---------------------------------------------------------------------------
// Objective values and gradients shared by the trainers and the gradient
// checks. Every primal step in the repo goes through one of these.
// ---------------------------------------------------------------------------
namespace objectives {

// Per-example coefficients realizing cpos * P_hat + cneg * N_hat.
Vector example_coefficients(const Vector& y, const ClassPriors& priors,
                            double cpos, double cneg);

// g / h: dual-weighted surrogate combination (sigmoid rewards).
double augmented_value(const Model& model, const Matrix& X, const Vector& y,
                       const ClassPriors& priors, double cpos, double cneg);
GradientBuffer augmented_gradient(const Model& model, const Matrix& X,
                                  const Vector& y, const ClassPriors& priors,
                                  double cpos, double cneg);

// Mean cross-entropy of the sigmoid of the score.
double ce_value(const Model& model, const Matrix& X, const Vector& y);
GradientBuffer ce_gradient(const Model& model, const Matrix& X,
                           const Vector& y);

// Valuation V(w, level) with reward surrogates in place of the rates.
double valuation_value(const Model& model, const Matrix& X, const Vector& y,
                       const ClassPriors& priors, const PseudolinearCoeffs& c,
                       double level);
GradientBuffer valuation_gradient(const Model& model, const Matrix& X,
                                  const Vector& y, const ClassPriors& priors,
                                  const PseudolinearCoeffs& c, double level);

// Structured loss-augmented objective at a fixed labeling:
//   0.5 ||w||^2 + C * (delta_const + (1/b) sum_i (ytilde_i - y_i) f(x_i; w))
double struct_value(const Model& model, const Matrix& X, const Vector& y,
                    const Vector& ytilde, double C, double delta_const);
GradientBuffer struct_gradient(const Model& model, const Matrix& X,
                               const Vector& y, const Vector& ytilde,
                               double C);

}  // namespace objectives

// ---------------------------------------------------------------------------
// Evaluation: zero_one rewards at threshold 0. Concave links and
// pseudolinear measures report their value at the observed (TPR, TNR); the
// nested measure reports the KL divergence between the dataset's priors and
// the classify-and-count estimate (lower is better).
// ---------------------------------------------------------------------------
double eval_metric_scores(const MeasureSpec& measure, const Vector& scores,
                          const Vector& y, double threshold = 0.0);
double eval_metric(const MeasureSpec& measure, const Model& model,
                   const Dataset& ds, double threshold = 0.0);
double eval_metric(const MeasureSpec& measure, const DampSplit& split,
                   const Dataset& ds, double threshold = 0.0);
bool metric_is_loss(const MeasureSpec& measure);

// ---------------------------------------------------------------------------
// Trainers.
// ---------------------------------------------------------------------------

// Primal-dual stochastic ascent for concave links: primal step on
// g = alpha * P_hat + beta * N_hat, then the closed-form dual step at the
// running conditional means of the accumulated rewards. A non-null init
// warm-starts the model in place of nn_init.
TrainResult dspade_train(const Dataset& train, const Dataset& test,
                         const NetworkConfig& net, const ConcaveLink& link,
                         const TrainConfig& cfg, const Model* init = nullptr);

// Nested primal-dual method for the -KLD measure: primal step on
// h = (g1 a1 + g2 b1) P_hat + (g1 a2 + g2 b2) N_hat with running means r, q
// and inner/outer dual steps. Batch sums are normalized by the batch size.
TrainResult dnemsis_train(const Dataset& train, const Dataset& test,
                          const NetworkConfig& net, const NestedMeasure& m,
                          const TrainConfig& cfg, const Model* init = nullptr);

// Alternating maximization for pseudolinear measures: cross-entropy pretrain
// of the stacked pair, then per outer step a fresh level batch sets
// v_t = P_(a,b),S(w1) and T' inner ascent steps run on V(., v_t) over the
// frozen lower features. A degenerate level batch clamps v_t to its
// previous value.
DampResult damp_train(const Dataset& train, const Dataset& test,
                      const NetworkConfig& lower_net,
                      const NetworkConfig& upper_net,
                      const PseudolinearCoeffs& coeffs, const TrainConfig& cfg);

// Cross-entropy baseline; the measure argument is evaluated for the trace.
TrainResult ce_train(const Dataset& train, const Dataset& test,
                     const NetworkConfig& net, const TrainConfig& cfg,
                     const MeasureSpec& eval_measure);

// Measure-maximizing threshold over all validation-score midpoints (plus one
// candidate below and above); ties resolve to the smallest threshold.
double plugin_tune(const Vector& scores, const Vector& y,
                   const std::function<double(const ConfusionCounts&)>& metric);
double plugin_tune(const Model& model, const Dataset& validation,
                   const MeasureSpec& measure);

// Exact most-violated labeling: maximizes Delta(confusion(ytilde, y)) +
// sum_i (ytilde_i - y_i) s_i over all 2^n labelings via the
// sort-and-enumerate scheme (O(n+ * n- + n log n)). Ties prefer fewer
// predicted positives, so zero scores resolve to -1 when Delta is flat.
Vector most_violated_labeling(
    const Vector& scores, const Vector& y,
    const std::function<double(const ConfusionCounts&)>& delta);

// Minibatch structured-loss baseline: descend on
// w + C * (1/b) sum_i (ytilde_i - y_i) grad f(x_i; w).
TrainResult struct_ann_train(
    const Dataset& train, const Dataset& test, const NetworkConfig& net,
    const std::function<double(const ConfusionCounts&)>& delta,
    const MeasureSpec& eval_measure, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Stabilization diagnostics over recorded gradient norms.
// ---------------------------------------------------------------------------
struct StabilityReport {
  std::optional<long> first_stable_iter;  // first ||grad|| <= epsilon
  std::vector<double> running_min;        // aligned with trace records
  double first_decile_min = 0.0;          // min of raw norms, first decile
  double last_decile_min = 0.0;           // min of raw norms, last decile
  double decile_ratio = 0.0;              // last / first (0 if first is 0)
  bool stabilizing = false;               // decile_ratio <= 1
};

StabilityReport stability_report(const TrainTrace& trace, double epsilon);

}  // namespace nondecomp
