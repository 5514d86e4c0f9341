#pragma once

#include "nondecomp/rewards.hpp"
#include "nondecomp/types.hpp"

#include <functional>
#include <variant>

namespace nondecomp {

// ---------------------------------------------------------------------------
// Concave links Psi(u, v) on [0,1]^2 with closed-form supergradients.
// ---------------------------------------------------------------------------

enum class LinkKind { min_tpr_tnr, q_mean };

struct ConcaveLink {
  LinkKind kind = LinkKind::min_tpr_tnr;
  double epsilon_clamp = 1e-8;  // guards the q_mean singularity at (1,1)
};

// min: min(u, v).  q_mean: 1 - sqrt(((1-u)^2 + (1-v)^2) / 2).
// Inputs are clamped to [0,1] within a 1e-9 slack; beyond that DomainError.
double link_value(const ConcaveLink& link, double u, double v);

// A supergradient of Psi at (u, v); by Fenchel-Young this solves the dual
// argmin over alpha * u + beta * v - Psi*(alpha, beta) exactly.
//   min:    (1,0) if u < v, (0,1) if u > v, (1/2,1/2) at the tie.
//   q_mean: component i is (1-.)/(2 sqrt(S/2)) with S = (1-u)^2 + (1-v)^2,
//           the denominator clamped below epsilon_clamp (so (0,0) at (1,1)).
Vector2 dual_step(const ConcaveLink& link, double u, double v);

// ---------------------------------------------------------------------------
// Grid Fenchel machinery. Conjugates are evaluated by brute-force inf over a
// grid on [0,1]^2; the dual argmin scans a grid over a dual box. This is the
// independent test oracle for dual_step and nested_dual_steps.
// ---------------------------------------------------------------------------

class FenchelGrid {
 public:
  using Fn2 = std::function<double(double, double)>;

  FenchelGrid(Fn2 psi, double grid_step, double dual_lo = 0.0,
              double dual_hi = 1.0);

  // Psi*(alpha, beta) = min over the (u,v) grid of alpha u + beta v - Psi.
  double conjugate(double alpha, double beta) const;

  // argmin over the dual grid of alpha u + beta v - Psi*(alpha, beta).
  Vector2 argmin_dual(double u, double v) const;

  // Dual objective at a specific (alpha, beta), using the grid conjugate.
  double dual_objective(double alpha, double beta, double u, double v) const;

 private:
  void build_dual_table() const;

  Fn2 psi_;
  double step_;
  double dual_lo_, dual_hi_;
  Index n_vals_ = 0;   // grid points per axis on [0,1]
  Index n_duals_ = 0;  // grid points per axis on the dual box
  Matrix psi_vals_;    // cached Psi over the value grid
  mutable Matrix conj_table_;  // cached Psi* over the dual grid
  mutable bool table_built_ = false;
};

Vector2 fenchel_oracle(const ConcaveLink& link, double u, double v,
                       double grid_step);
double fenchel_conjugate_value(const ConcaveLink& link, double alpha,
                               double beta, double grid_step);

// ---------------------------------------------------------------------------
// Pseudolinear measures: ratios of two affine functions of (TPR, TNR).
// ---------------------------------------------------------------------------

struct PseudolinearCoeffs {
  Vector3 a = Vector3::Zero();  // numerator  a0 + a1 u + a2 v
  Vector3 b = Vector3::Zero();  // denominator b0 + b1 u + b2 v
  double lower_bound_m = 0.0;   // inf of the denominator over [0,1]^2
  double upper_bound_M = 0.0;   // sup of the numerator over [0,1]^2
};

// F_beta as a fractional-linear function of the rates:
//   a = (0, 1+beta^2, 0),  b = (beta^2 + (1-p)/p, 1, -(1-p)/p)
// with m and M the affine extrema over the corners of [0,1]^2.
PseudolinearCoeffs fbeta_coeffs(double beta, const ClassPriors& priors);

// Ratio value; DomainError if the denominator drops below lower_bound_m.
double pseudolinear_value(const PseudolinearCoeffs& c, double u, double v);

// V = P_a - level * P_b, the cost-weighted classification objective.
// Positive iff the pseudolinear measure exceeds the level.
double valuation(const PseudolinearCoeffs& c, double u, double v,
                 double level);

// ---------------------------------------------------------------------------
// KL divergence and its nested concave decomposition.
// ---------------------------------------------------------------------------

// Natural-log KL divergence between 2-simplex points; p_est components are
// floored at epsilon_log (DomainError if a component is 0 with no floor).
double kld(const Vector2& p_true, const Vector2& p_est,
           double epsilon_log = 1e-12);

// -KLD(p, p_hat(u,v)) written as Psi(zeta1, zeta2) with Psi = sum and
//   zeta1(u,v) = p log(p_hat_pos / p),   p_hat_pos = p u + (1-p)(1-v)
//   zeta2(u,v) = (1-p) log(p_hat_neg / (1-p)), p_hat_neg = p(1-u) + (1-p) v
// p_hat_pos is the predicted-positive fraction of a classifier with rates
// (u, v), so maximizing the measure drives quantification error to zero.
struct NestedMeasure {
  double p = 0.5;
  double epsilon_log = 1e-12;

  Vector2 p_hat(double u, double v) const {
    return {p * u + (1.0 - p) * (1.0 - v), p * (1.0 - u) + (1.0 - p) * v};
  }
  double zeta1(double u, double v) const;
  double zeta2(double u, double v) const;
  Vector2 zeta1_grad(double u, double v) const;  // chain rule on log-affine
  Vector2 zeta2_grad(double u, double v) const;
  double psi(double z1, double z2) const { return z1 + z2; }
  Vector2 psi_grad(double, double) const { return {1.0, 1.0}; }

  double value(double u, double v) const {
    return psi(zeta1(u, v), zeta2(u, v));
  }

  // zeta_i*(0) = -sup zeta_i over [0,1]^2, needed at the zero-initialized
  // duals of the first iteration.
  Vector2 conjugates_at_zero() const;

  bool floors(double u, double v) const;  // true if p_hat hits the log floor
};

NestedMeasure neg_kld_nested(const ClassPriors& priors);

// Inner/outer dual state for the nested updates.
struct NestedDuals {
  Vector2 alpha = Vector2::Zero();  // supergradient of zeta1 at r
  Vector2 beta = Vector2::Zero();   // supergradient of zeta2 at r
  Vector2 gamma = Vector2::Zero();  // supergradient of Psi at q
  // Conjugate values paired with alpha/beta by the Fenchel-Young equality
  // zeta*(grad zeta(r)) = <grad zeta(r), r> - zeta(r).
  double zeta1_conj = 0.0;
  double zeta2_conj = 0.0;
};

NestedDuals nested_dual_steps(const NestedMeasure& m, const Vector2& r,
                              const Vector2& q);

// ---------------------------------------------------------------------------

using MeasureSpec =
    std::variant<ConcaveLink, PseudolinearCoeffs, NestedMeasure>;

}  // namespace nondecomp
