#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nondecomp/measures.hpp"
#include "nondecomp/rng.hpp"

#include <cmath>

using namespace nondecomp;

namespace {

const ConcaveLink kMin{LinkKind::min_tpr_tnr};
const ConcaveLink kQMean{LinkKind::q_mean};

// independent harmonic-mean form of F_beta from a confusion matrix
double fbeta_from_counts(double beta, double tp, double fn, double fp) {
  const double b2 = beta * beta;
  const double denom = (1.0 + b2) * tp + b2 * fn + fp;
  return denom == 0.0 ? 0.0 : (1.0 + b2) * tp / denom;
}

}  // namespace

TEST_CASE("link values") {
  CHECK(link_value(kMin, 0.3, 0.7) == doctest::Approx(0.3));
  CHECK(link_value(kQMean, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(link_value(kQMean, 1.0, 0.0) ==
        doctest::Approx(1.0 - std::sqrt(0.5)).epsilon(1e-9));
  CHECK_THROWS_AS(link_value(kMin, 1.5, 0.5), DomainError);
  // soft clamp within 1e-9
  CHECK(link_value(kMin, 1.0 + 1e-10, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("closed-form dual step") {
  const Vector2 d1 = dual_step(kMin, 0.4, 0.6);
  CHECK(d1[0] == 1.0);
  CHECK(d1[1] == 0.0);
  const Vector2 d2 = dual_step(kMin, 0.5, 0.5);
  CHECK(d2[0] == doctest::Approx(0.5));
  CHECK(d2[1] == doctest::Approx(0.5));
  const Vector2 d3 = dual_step(kQMean, 1.0, 0.0);
  CHECK(d3[0] == doctest::Approx(0.0));
  CHECK(d3[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  const Vector2 d4 = dual_step(kQMean, 0.5, 0.5);
  CHECK(d4[0] == doctest::Approx(d4[1]));
  // singular point: clamped to the zero supergradient
  const Vector2 d5 = dual_step(kQMean, 1.0, 1.0);
  CHECK(d5.norm() == 0.0);
}

TEST_CASE("supergradient inequality on a 0.05 grid") {
  for (const auto& link : {kMin, kQMean}) {
    for (int i = 0; i <= 20; ++i) {
      for (int j = 0; j <= 20; ++j) {
        const double u = 0.05 * i, v = 0.05 * j;
        const Vector2 g = dual_step(link, u, v);
        const double base = link_value(link, u, v);
        for (int a = 0; a <= 20; a += 2) {
          for (int b = 0; b <= 20; b += 2) {
            const double up = 0.05 * a, vp = 0.05 * b;
            const double bound = base + g[0] * (up - u) + g[1] * (vp - v);
            CHECK(link_value(link, up, vp) <= bound + 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("fenchel grid oracle agrees with the closed form") {
  SUBCASE("min at (0.2, 0.8) lands on (1, 0)") {
    const Vector2 arg = fenchel_oracle(kMin, 0.2, 0.8, 0.01);
    CHECK(arg[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(arg[1] == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("q_mean at (0.5, 0.5) is symmetric up to the grid resolution") {
    const Vector2 arg = fenchel_oracle(kQMean, 0.5, 0.5, 0.01);
    CHECK(std::abs(arg[0] - arg[1]) <= 0.0101);
  }
  SUBCASE("objective attainment within 1e-3 on a coarse (u,v) sample") {
    for (const auto& link : {kMin, kQMean}) {
      FenchelGrid grid(
          [&](double a, double b) { return link_value(link, a, b); }, 0.01);
      for (double u : {0.0, 0.25, 0.5, 0.8, 1.0}) {
        for (double v : {0.1, 0.5, 0.95}) {
          const Vector2 closed = dual_step(link, u, v);
          const Vector2 oracle = grid.argmin_dual(u, v);
          const double closed_obj =
              grid.dual_objective(closed[0], closed[1], u, v);
          const double oracle_obj =
              grid.dual_objective(oracle[0], oracle[1], u, v);
          CHECK(oracle_obj >= closed_obj - 1e-3);
          CHECK(closed_obj <= oracle_obj + 1e-3);
        }
      }
    }
  }
}

TEST_CASE("fenchel conjugate values") {
  // min link on the simplex: inf { alpha u + beta v - min(u,v) } = 0
  CHECK(fenchel_conjugate_value(kMin, 1.0, 0.0, 0.01) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fenchel_conjugate_value(kMin, 0.3, 0.7, 0.01) ==
        doctest::Approx(0.0).epsilon(1e-9));
  // conjugate at the origin is -sup Psi
  CHECK(fenchel_conjugate_value(kQMean, 0.0, 0.0, 0.01) ==
        doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("F_beta coefficients") {
  const PseudolinearCoeffs c = fbeta_coeffs(1.0, ClassPriors::value(0.5));
  CHECK(c.a[0] == 0.0);
  CHECK(c.a[1] == doctest::Approx(2.0));
  CHECK(c.a[2] == 0.0);
  CHECK(c.b[0] == doctest::Approx(2.0));
  CHECK(c.b[1] == doctest::Approx(1.0));
  CHECK(c.b[2] == doctest::Approx(-1.0));
  CHECK(c.lower_bound_m == doctest::Approx(1.0));   // beta^2
  CHECK(c.upper_bound_M == doctest::Approx(2.0));   // 1 + beta^2

  CHECK(pseudolinear_value(c, 1.0, 1.0) == doctest::Approx(1.0));
  const PseudolinearCoeffs c25 = fbeta_coeffs(1.0, ClassPriors::value(0.25));
  CHECK(pseudolinear_value(c25, 0.8, 0.9) ==
        doctest::Approx(1.6 / 2.1).epsilon(1e-9));
  CHECK(pseudolinear_value(c25, 1.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("identical numerator and denominator give the constant 1") {
  PseudolinearCoeffs c;
  c.a = Vector3(1.0, 0.5, -0.2);
  c.b = c.a;
  c.lower_bound_m = 0.3;  // attained inf of b over the square
  c.upper_bound_M = 1.5;
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const double u = rng.uniform(), v = rng.uniform(0.0, 0.5);
    CHECK(pseudolinear_value(c, u, v) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pseudolinear F_beta equals the confusion-matrix form") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(0.05, 0.95);
    const double u = rng.uniform(), v = rng.uniform();
    const double beta = std::array{0.5, 1.0, 2.0}[i % 3];
    const PseudolinearCoeffs c = fbeta_coeffs(beta, ClassPriors::value(p));
    // rates to an (unnormalized) confusion matrix with priors p
    const double tp = p * u, fn = p * (1.0 - u);
    const double fp = (1.0 - p) * (1.0 - v);
    const double expect = fbeta_from_counts(beta, tp, fn, fp);
    CHECK(pseudolinear_value(c, u, v) ==
          doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("valuation function") {
  const PseudolinearCoeffs c = fbeta_coeffs(1.0, ClassPriors::value(0.3));
  Rng rng(13);
  SUBCASE("valuation at the measure's own level vanishes") {
    for (int i = 0; i < 200; ++i) {
      const double u = rng.uniform(), v = rng.uniform();
      const double level = pseudolinear_value(c, u, v);
      CHECK(valuation(c, u, v, level) == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
  SUBCASE("level zero recovers the numerator") {
    CHECK(valuation(c, 0.7, 0.4, 0.0) ==
          doctest::Approx(c.a[0] + c.a[1] * 0.7 + c.a[2] * 0.4));
  }
  SUBCASE("sign tracks the measure-level comparison") {
    for (int i = 0; i < 1000; ++i) {
      const double u = rng.uniform(), v = rng.uniform();
      const double level = rng.uniform();
      const double value = pseudolinear_value(c, u, v);
      const double val = valuation(c, u, v, level);
      if (value > level + 1e-12) CHECK(val > 0.0);
      if (value < level - 1e-12) CHECK(val < 0.0);
    }
  }
}

TEST_CASE("kld values and nonnegativity") {
  CHECK(kld({0.5, 0.5}, {0.5, 0.5}) == doctest::Approx(0.0));
  CHECK(kld({0.5, 0.5}, {0.25, 0.75}) ==
        doctest::Approx(0.143841).epsilon(1e-5));
  CHECK_THROWS_AS(kld({0.5, 0.5}, {0.0, 1.0}, 0.0), DomainError);
  CHECK_THROWS_AS(kld({0.5, 0.5}, {0.3, 0.3}), DomainError);
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(0.001, 0.999);
    const double q = rng.uniform(0.001, 0.999);
    CHECK(kld({p, 1.0 - p}, {q, 1.0 - q}) >= -1e-15);
  }
}

TEST_CASE("nested -KLD decomposition") {
  SUBCASE("perfect rates give zero divergence") {
    const NestedMeasure m = neg_kld_nested(ClassPriors::value(0.3));
    CHECK(m.value(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("Psi(zeta1, zeta2) equals -kld on 1000 random tuples") {
    Rng rng(19);
    for (int i = 0; i < 1000; ++i) {
      const double p = rng.uniform(0.05, 0.95);
      const double u = rng.uniform(), v = rng.uniform();
      const NestedMeasure m = neg_kld_nested(ClassPriors::value(p));
      const Vector2 est = m.p_hat(u, v);
      const double direct = kld({p, 1.0 - p}, est, m.epsilon_log);
      CHECK(m.value(u, v) == doctest::Approx(-direct).epsilon(1e-9));
      CHECK(m.value(u, v) + direct == doctest::Approx(0.0).epsilon(1e-9));
    }
  }
  SUBCASE("zeta supergradients match central differences") {
    Rng rng(23);
    const double h = 1e-6;
    for (int i = 0; i < 200; ++i) {
      const double p = rng.uniform(0.1, 0.9);
      const double u = rng.uniform(0.05, 0.95), v = rng.uniform(0.05, 0.95);
      const NestedMeasure m = neg_kld_nested(ClassPriors::value(p));
      const Vector2 g1 = m.zeta1_grad(u, v);
      const Vector2 g2 = m.zeta2_grad(u, v);
      CHECK(g1[0] == doctest::Approx((m.zeta1(u + h, v) - m.zeta1(u - h, v)) /
                                     (2 * h))
                         .epsilon(1e-6));
      CHECK(g1[1] == doctest::Approx((m.zeta1(u, v + h) - m.zeta1(u, v - h)) /
                                     (2 * h))
                         .epsilon(1e-6));
      CHECK(g2[0] == doctest::Approx((m.zeta2(u + h, v) - m.zeta2(u - h, v)) /
                                     (2 * h))
                         .epsilon(1e-6));
      CHECK(g2[1] == doctest::Approx((m.zeta2(u, v + h) - m.zeta2(u, v - h)) /
                                     (2 * h))
                         .epsilon(1e-6));
    }
  }
}

TEST_CASE("nested dual steps") {
  const NestedMeasure m = neg_kld_nested(ClassPriors::value(0.5));
  SUBCASE("linear outer link pins gamma at (1,1)") {
    Rng rng(29);
    for (int i = 0; i < 50; ++i) {
      const Vector2 r{rng.uniform(), rng.uniform()};
      const Vector2 q{rng.normal(), rng.normal()};
      const NestedDuals d = nested_dual_steps(m, r, q);
      CHECK(d.gamma[0] == 1.0);
      CHECK(d.gamma[1] == 1.0);
    }
  }
  SUBCASE("alpha at r = (1,1), p = 0.5 is (0.5, -0.5)") {
    const NestedDuals d = nested_dual_steps(m, {1.0, 1.0}, {0.0, 0.0});
    CHECK(d.alpha[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d.alpha[1] == doctest::Approx(-0.5).epsilon(1e-12));
  }
  SUBCASE("inner duals attain the grid-oracle objective within 1e-3") {
    const NestedMeasure m3 = neg_kld_nested(ClassPriors::value(0.3));
    FenchelGrid grid([&](double u, double v) { return m3.zeta1(u, v); }, 0.01,
                     -2.0, 2.0);
    Rng rng(31);
    for (double u : {0.3, 0.6, 0.9}) {
      for (double v : {0.2, 0.7}) {
        const NestedDuals d = nested_dual_steps(m3, {u, v}, {0.0, 0.0});
        // Fenchel-Young: the closed-form dual attains zeta1(r)
        const double attained =
            d.alpha[0] * u + d.alpha[1] * v - grid.conjugate(d.alpha[0],
                                                             d.alpha[1]);
        CHECK(attained == doctest::Approx(m3.zeta1(u, v)).epsilon(1e-3));
        // and no sampled dual does better (the objective is a min)
        for (int i = 0; i < 100; ++i) {
          const double a0 = rng.uniform(-2.0, 2.0);
          const double a1 = rng.uniform(-2.0, 2.0);
          const double other = a0 * u + a1 * v - grid.conjugate(a0, a1);
          CHECK(other >= attained - 1e-3);
        }
      }
    }
  }
  SUBCASE("conjugate values follow the Fenchel-Young pairing") {
    const Vector2 r{0.8, 0.6};
    const NestedDuals d = nested_dual_steps(m, r, {0.0, 0.0});
    CHECK(d.zeta1_conj ==
          doctest::Approx(d.alpha.dot(r) - m.zeta1(r[0], r[1])).epsilon(1e-12));
    CHECK(d.zeta2_conj ==
          doctest::Approx(d.beta.dot(r) - m.zeta2(r[0], r[1])).epsilon(1e-12));
  }
}

TEST_CASE("exhaustive pseudolinear/confusion equivalence up to n = 50") {
  long checked = 0;
  for (long n = 1; n <= 50; ++n) {
    for (long tp = 0; tp <= n; ++tp) {
      for (long fn = 0; tp + fn <= n; ++fn) {
        for (long fp = 0; tp + fn + fp <= n; ++fp) {
          const long tn = n - tp - fn - fp;
          const long pos = tp + fn, neg = fp + tn;
          if (pos == 0 || neg == 0) continue;  // rates undefined
          const double p = static_cast<double>(pos) / static_cast<double>(n);
          const double u = static_cast<double>(tp) / static_cast<double>(pos);
          const double v = static_cast<double>(tn) / static_cast<double>(neg);
          const PseudolinearCoeffs c = fbeta_coeffs(1.0, ClassPriors::value(p));
          const double expect =
              fbeta_from_counts(1.0, static_cast<double>(tp),
                                static_cast<double>(fn),
                                static_cast<double>(fp));
          const double got = pseudolinear_value(c, u, v);
          ++checked;
          if (std::abs(got - expect) > 1e-9) {
            CAPTURE(n);
            CAPTURE(tp);
            CAPTURE(fn);
            CAPTURE(fp);
            REQUIRE(got == doctest::Approx(expect).epsilon(1e-9));
          }
        }
      }
    }
  }
  CHECK(checked > 100000);
}
