#pragma once

#include "nondecomp/types.hpp"

#include <cmath>
#include <utility>

namespace nondecomp {

struct Model;    // net.hpp
struct Dataset;  // data.hpp

// Reward surrogates for classification accuracy. Only the sigmoid kind is
// differentiable and admissible in primal gradients; zero_one feeds dual
// statistics (the "-NS" algorithm variants) and all evaluation metrics.
enum class RewardKind { sigmoid, zero_one };

// r(y_hat, y) for y in {-1,+1}. sigmoid: 1/(1+exp(-y*y_hat)).
// zero_one: I{y*y_hat > 0}; a score of exactly 0 counts as incorrect.
double reward(RewardKind kind, double y_hat, double y);

struct ClassPriors {
  double p = 0.5;  // proportion of positives, strictly inside (0,1)
  enum class Source { empirical_train, user_supplied };
  Source source = Source::empirical_train;

  static ClassPriors empirical(const Dataset& ds);
  static ClassPriors value(double p);

  void validate() const;  // throws DomainError on degenerate p
};

// Class-normalized rewards r+ = (1/p) r I{y=+1}, r- = (1/(1-p)) r I{y=-1};
// exactly one component can be nonzero.
std::pair<double, double> class_normalized_reward_from_score(
    RewardKind kind, const ClassPriors& priors, double score, double y);
std::pair<double, double> class_normalized_reward(RewardKind kind,
                                                  const ClassPriors& priors,
                                                  const Model& model,
                                                  Eigen::Ref<const Vector> x,
                                                  double y);

// Batch means (P_hat, N_hat) of the class-normalized rewards. Their
// expectations surrogate TPR and TNR.
std::pair<double, double> sample_averages_from_scores(RewardKind kind,
                                                      const ClassPriors& priors,
                                                      const Vector& scores,
                                                      const Vector& y);
std::pair<double, double> sample_averages(RewardKind kind,
                                          const ClassPriors& priors,
                                          const Model& model, const Matrix& X,
                                          const Vector& y);

// Running accumulators feeding the dual updates. After t unit-mean batch
// accumulations n_plus + n_minus == t, and r_plus/n_plus is the running mean
// reward among positive examples (a TPR estimate under zero_one rewards).
struct RewardStats {
  double r_plus = 0.0;
  double r_minus = 0.0;
  double n_plus = 0.0;
  double n_minus = 0.0;
  long t = 0;

  bool has_both_classes() const { return n_plus > 0.0 && n_minus > 0.0; }
  double tpr_estimate() const;  // r_plus / n_plus, DomainError when n_plus == 0
  double tnr_estimate() const;
};

// Per-batch class-conditional reward sums scaled by 1/b. These are the
// "P_hat * p_hat"-style quantities: reward_pos = (1/b) sum_{y=+1} r_i and
// frac_pos = (1/b) sum I{y=+1}, so accumulated ratios stay conditional means
// with no leftover prior factor.
struct BatchRewardSummary {
  double reward_pos = 0.0;
  double reward_neg = 0.0;
  double frac_pos = 0.0;
  double frac_neg = 0.0;
};

BatchRewardSummary batch_reward_summary(RewardKind kind, const Vector& scores,
                                        const Vector& y);

// Additive update; a class absent from the batch contributes zero to both
// its reward and count accumulator. Increments t.
void accumulate(RewardStats& stats, const BatchRewardSummary& batch);

struct ConfusionCounts {
  long tp = 0;
  long fn = 0;
  long fp = 0;
  long tn = 0;

  long positives() const { return tp + fn; }
  long negatives() const { return fp + tn; }
  long total() const { return tp + fn + fp + tn; }
};

// Counts by sign(score - threshold); a score exactly at the threshold counts
// as an error for its true class, matching the zero_one reward tie rule.
ConfusionCounts confusion_from_scores(const Vector& scores, const Vector& y,
                                      double threshold = 0.0);
ConfusionCounts confusion(const Model& model, const Dataset& ds,
                          double threshold = 0.0);

double tpr(const ConfusionCounts& c);  // DomainError when no positives
double tnr(const ConfusionCounts& c);  // DomainError when no negatives

}  // namespace nondecomp
