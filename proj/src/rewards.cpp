#include "nondecomp/rewards.hpp"

#include "nondecomp/data.hpp"
#include "nondecomp/net.hpp"

#include <cmath>

namespace nondecomp {

double reward(RewardKind kind, double y_hat, double y) {
  if (!std::isfinite(y_hat)) throw NumericError("reward: non-finite score");
  const double z = y * y_hat;
  switch (kind) {
    case RewardKind::sigmoid:
      return 1.0 / (1.0 + std::exp(-z));
    case RewardKind::zero_one:
      return z > 0.0 ? 1.0 : 0.0;
  }
  throw ConfigError("reward: unknown kind");
}

ClassPriors ClassPriors::empirical(const Dataset& ds) {
  ClassPriors priors;
  priors.p = ds.positive_fraction();
  priors.source = Source::empirical_train;
  priors.validate();
  return priors;
}

ClassPriors ClassPriors::value(double p) {
  ClassPriors priors;
  priors.p = p;
  priors.source = Source::user_supplied;
  priors.validate();
  return priors;
}

void ClassPriors::validate() const {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("degenerate class prior p=" + std::to_string(p));
  }
}

std::pair<double, double> class_normalized_reward_from_score(
    RewardKind kind, const ClassPriors& priors, double score, double y) {
  priors.validate();
  const double r = reward(kind, score, y);
  if (y > 0.0) return {r / priors.p, 0.0};
  return {0.0, r / (1.0 - priors.p)};
}

std::pair<double, double> class_normalized_reward(RewardKind kind,
                                                  const ClassPriors& priors,
                                                  const Model& model,
                                                  Eigen::Ref<const Vector> x,
                                                  double y) {
  return class_normalized_reward_from_score(kind, priors, score(model, x), y);
}

std::pair<double, double> sample_averages_from_scores(RewardKind kind,
                                                      const ClassPriors& priors,
                                                      const Vector& scores,
                                                      const Vector& y) {
  if (scores.size() == 0) throw DomainError("sample_averages: empty batch");
  if (scores.size() != y.size()) {
    throw ShapeError("sample_averages: scores/labels size mismatch");
  }
  double sum_pos = 0.0, sum_neg = 0.0;
  for (Index i = 0; i < scores.size(); ++i) {
    const auto [rp, rn] =
        class_normalized_reward_from_score(kind, priors, scores[i], y[i]);
    sum_pos += rp;
    sum_neg += rn;
  }
  const double n = static_cast<double>(scores.size());
  return {sum_pos / n, sum_neg / n};
}

std::pair<double, double> sample_averages(RewardKind kind,
                                          const ClassPriors& priors,
                                          const Model& model, const Matrix& X,
                                          const Vector& y) {
  return sample_averages_from_scores(kind, priors, score_batch(model, X), y);
}

double RewardStats::tpr_estimate() const {
  if (n_plus <= 0.0) throw DomainError("no positives accumulated");
  return r_plus / n_plus;
}

double RewardStats::tnr_estimate() const {
  if (n_minus <= 0.0) throw DomainError("no negatives accumulated");
  return r_minus / n_minus;
}

BatchRewardSummary batch_reward_summary(RewardKind kind, const Vector& scores,
                                        const Vector& y) {
  if (scores.size() == 0) {
    throw DomainError("batch_reward_summary: empty batch");
  }
  BatchRewardSummary s;
  for (Index i = 0; i < scores.size(); ++i) {
    const double r = reward(kind, scores[i], y[i]);
    if (y[i] > 0.0) {
      s.reward_pos += r;
      s.frac_pos += 1.0;
    } else {
      s.reward_neg += r;
      s.frac_neg += 1.0;
    }
  }
  const double b = static_cast<double>(scores.size());
  s.reward_pos /= b;
  s.reward_neg /= b;
  s.frac_pos /= b;
  s.frac_neg /= b;
  return s;
}

void accumulate(RewardStats& stats, const BatchRewardSummary& batch) {
  stats.r_plus += batch.reward_pos;
  stats.r_minus += batch.reward_neg;
  stats.n_plus += batch.frac_pos;
  stats.n_minus += batch.frac_neg;
  stats.t += 1;
}

ConfusionCounts confusion_from_scores(const Vector& scores, const Vector& y,
                                      double threshold) {
  if (scores.size() != y.size()) {
    throw ShapeError("confusion: scores/labels size mismatch");
  }
  ConfusionCounts c;
  for (Index i = 0; i < scores.size(); ++i) {
    const double margin = scores[i] - threshold;
    if (y[i] > 0.0) {
      // a score exactly at the threshold is an error for either class
      if (margin > 0.0) {
        ++c.tp;
      } else {
        ++c.fn;
      }
    } else {
      if (margin < 0.0) {
        ++c.tn;
      } else {
        ++c.fp;
      }
    }
  }
  return c;
}

ConfusionCounts confusion(const Model& model, const Dataset& ds,
                          double threshold) {
  return confusion_from_scores(score_batch(model, ds.X), ds.y, threshold);
}

double tpr(const ConfusionCounts& c) {
  if (c.positives() == 0) throw DomainError("tpr undefined: no positives");
  return static_cast<double>(c.tp) / static_cast<double>(c.positives());
}

double tnr(const ConfusionCounts& c) {
  if (c.negatives() == 0) throw DomainError("tnr undefined: no negatives");
  return static_cast<double>(c.tn) / static_cast<double>(c.negatives());
}

}  // namespace nondecomp
