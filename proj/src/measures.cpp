#include "nondecomp/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nondecomp {

namespace {

// Rates arrive from floating-point reward ratios; tolerate tiny excursions.
double clamp_rate(double x, const char* which) {
  constexpr double slack = 1e-9;
  if (x < -slack || x > 1.0 + slack) {
    throw DomainError(std::string(which) + " outside [0,1]: " +
                      std::to_string(x));
  }
  return std::clamp(x, 0.0, 1.0);
}

}  // namespace

double link_value(const ConcaveLink& link, double u, double v) {
  u = clamp_rate(u, "u");
  v = clamp_rate(v, "v");
  switch (link.kind) {
    case LinkKind::min_tpr_tnr:
      return std::min(u, v);
    case LinkKind::q_mean: {
      const double s = (1.0 - u) * (1.0 - u) + (1.0 - v) * (1.0 - v);
      return 1.0 - std::sqrt(s / 2.0);
    }
  }
  throw ConfigError("unknown link kind");
}

Vector2 dual_step(const ConcaveLink& link, double u, double v) {
  u = clamp_rate(u, "u");
  v = clamp_rate(v, "v");
  switch (link.kind) {
    case LinkKind::min_tpr_tnr:
      if (u < v) return {1.0, 0.0};
      if (u > v) return {0.0, 1.0};
      return {0.5, 0.5};  // any simplex point works; symmetric tie-break
    case LinkKind::q_mean: {
      const double s = (1.0 - u) * (1.0 - u) + (1.0 - v) * (1.0 - v);
      const double denom = std::max(std::sqrt(s / 2.0), link.epsilon_clamp);
      return {(1.0 - u) / (2.0 * denom), (1.0 - v) / (2.0 * denom)};
    }
  }
  throw ConfigError("unknown link kind");
}

FenchelGrid::FenchelGrid(Fn2 psi, double grid_step, double dual_lo,
                         double dual_hi)
    : psi_(std::move(psi)), step_(grid_step), dual_lo_(dual_lo),
      dual_hi_(dual_hi) {
  if (!(grid_step > 0.0 && grid_step <= 0.1)) {
    throw ConfigError("fenchel grid step must lie in (0, 0.1]");
  }
  n_vals_ = static_cast<Index>(std::llround(1.0 / step_)) + 1;
  n_duals_ =
      static_cast<Index>(std::llround((dual_hi_ - dual_lo_) / step_)) + 1;
  psi_vals_.resize(n_vals_, n_vals_);
  for (Index i = 0; i < n_vals_; ++i) {
    for (Index j = 0; j < n_vals_; ++j) {
      psi_vals_(i, j) = psi_(i * step_, j * step_);
    }
  }
}

double FenchelGrid::conjugate(double alpha, double beta) const {
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n_vals_; ++i) {
    const double au = alpha * (i * step_);
    for (Index j = 0; j < n_vals_; ++j) {
      const double obj = au + beta * (j * step_) - psi_vals_(i, j);
      if (obj < best) best = obj;
    }
  }
  return best;
}

void FenchelGrid::build_dual_table() const {
  if (table_built_) return;
  conj_table_.resize(n_duals_, n_duals_);
  for (Index i = 0; i < n_duals_; ++i) {
    for (Index j = 0; j < n_duals_; ++j) {
      conj_table_(i, j) = conjugate(dual_lo_ + i * step_, dual_lo_ + j * step_);
    }
  }
  table_built_ = true;
}

Vector2 FenchelGrid::argmin_dual(double u, double v) const {
  build_dual_table();
  double best = std::numeric_limits<double>::infinity();
  Vector2 arg{dual_lo_, dual_lo_};
  for (Index i = 0; i < n_duals_; ++i) {
    const double alpha = dual_lo_ + i * step_;
    for (Index j = 0; j < n_duals_; ++j) {
      const double beta = dual_lo_ + j * step_;
      const double obj = alpha * u + beta * v - conj_table_(i, j);
      if (obj < best) {
        best = obj;
        arg = {alpha, beta};
      }
    }
  }
  return arg;
}

double FenchelGrid::dual_objective(double alpha, double beta, double u,
                                   double v) const {
  return alpha * u + beta * v - conjugate(alpha, beta);
}

Vector2 fenchel_oracle(const ConcaveLink& link, double u, double v,
                       double grid_step) {
  FenchelGrid grid([link](double a, double b) { return link_value(link, a, b); },
                   grid_step);
  return grid.argmin_dual(u, v);
}

double fenchel_conjugate_value(const ConcaveLink& link, double alpha,
                               double beta, double grid_step) {
  FenchelGrid grid([link](double a, double b) { return link_value(link, a, b); },
                   grid_step);
  return grid.conjugate(alpha, beta);
}

namespace {

double affine_extreme(const Vector3& c, bool maximum) {
  double best = maximum ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::infinity();
  for (double u : {0.0, 1.0}) {
    for (double v : {0.0, 1.0}) {
      const double val = c[0] + c[1] * u + c[2] * v;
      best = maximum ? std::max(best, val) : std::min(best, val);
    }
  }
  return best;
}

}  // namespace

PseudolinearCoeffs fbeta_coeffs(double beta, const ClassPriors& priors) {
  priors.validate();
  if (!(beta > 0.0)) throw ConfigError("fbeta: beta must be positive");
  const double b2 = beta * beta;
  const double ratio = (1.0 - priors.p) / priors.p;
  PseudolinearCoeffs c;
  c.a = Vector3(0.0, 1.0 + b2, 0.0);
  c.b = Vector3(b2 + ratio, 1.0, -ratio);
  c.lower_bound_m = affine_extreme(c.b, /*maximum=*/false);  // = beta^2
  c.upper_bound_M = affine_extreme(c.a, /*maximum=*/true);   // = 1 + beta^2
  return c;
}

double pseudolinear_value(const PseudolinearCoeffs& c, double u, double v) {
  const double den = c.b[0] + c.b[1] * u + c.b[2] * v;
  if (den + 1e-12 < c.lower_bound_m) {
    throw DomainError("pseudolinear denominator below its lower bound");
  }
  const double num = c.a[0] + c.a[1] * u + c.a[2] * v;
  return num / den;
}

double valuation(const PseudolinearCoeffs& c, double u, double v,
                 double level) {
  return (c.a[0] - level * c.b[0]) + (c.a[1] - level * c.b[1]) * u +
         (c.a[2] - level * c.b[2]) * v;
}

double kld(const Vector2& p_true, const Vector2& p_est, double epsilon_log) {
  for (const auto& p : {p_true, p_est}) {
    if (p[0] < -1e-12 || p[1] < -1e-12 ||
        std::abs(p[0] + p[1] - 1.0) > 1e-9) {
      throw DomainError("kld: inputs must lie on the 2-simplex");
    }
  }
  double total = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (p_true[i] <= 0.0) continue;  // 0 log 0 = 0
    double q = p_est[i];
    if (q <= 0.0 && epsilon_log <= 0.0) {
      throw DomainError("kld: zero estimate without a log floor");
    }
    q = std::max(q, epsilon_log);
    total += p_true[i] * std::log(p_true[i] / q);
  }
  return total;
}

double NestedMeasure::zeta1(double u, double v) const {
  const double q = std::max(p_hat(u, v)[0], epsilon_log);
  return p * std::log(q / p);
}

double NestedMeasure::zeta2(double u, double v) const {
  const double q = std::max(p_hat(u, v)[1], epsilon_log);
  return (1.0 - p) * std::log(q / (1.0 - p));
}

Vector2 NestedMeasure::zeta1_grad(double u, double v) const {
  const double q = std::max(p_hat(u, v)[0], epsilon_log);
  return {p * p / q, -p * (1.0 - p) / q};
}

Vector2 NestedMeasure::zeta2_grad(double u, double v) const {
  const double q = std::max(p_hat(u, v)[1], epsilon_log);
  return {-p * (1.0 - p) / q, (1.0 - p) * (1.0 - p) / q};
}

Vector2 NestedMeasure::conjugates_at_zero() const {
  // sup zeta1 is at p_hat_pos = 1, sup zeta2 at p_hat_neg = 1.
  return {p * std::log(p), (1.0 - p) * std::log(1.0 - p)};
}

bool NestedMeasure::floors(double u, double v) const {
  const Vector2 q = p_hat(u, v);
  return q[0] < epsilon_log || q[1] < epsilon_log;
}

NestedMeasure neg_kld_nested(const ClassPriors& priors) {
  priors.validate();
  NestedMeasure m;
  m.p = priors.p;
  return m;
}

NestedDuals nested_dual_steps(const NestedMeasure& m, const Vector2& r,
                              const Vector2& q) {
  if (!r.allFinite() || !q.allFinite()) {
    throw NumericError("nested_dual_steps: non-finite running averages");
  }
  NestedDuals duals;
  duals.alpha = m.zeta1_grad(r[0], r[1]);
  duals.beta = m.zeta2_grad(r[0], r[1]);
  duals.gamma = m.psi_grad(q[0], q[1]);
  // Fenchel-Young equality at the supergradient point.
  duals.zeta1_conj = duals.alpha.dot(r) - m.zeta1(r[0], r[1]);
  duals.zeta2_conj = duals.beta.dot(r) - m.zeta2(r[0], r[1]);
  return duals;
}

}  // namespace nondecomp
