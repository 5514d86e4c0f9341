#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nondecomp/data.hpp"
#include "nondecomp/measures.hpp"
#include "nondecomp/rng.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace nondecomp;

namespace {

Dataset random_dataset(std::uint64_t seed, Index n, Index d, double p) {
  Rng rng(seed);
  Matrix X(n, d);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) X(i, j) = rng.normal();
    y[i] = rng.uniform() < p ? 1.0 : -1.0;
  }
  if (y.maxCoeff() < 0) y[0] = 1.0;
  if (y.minCoeff() > 0) y[0] = -1.0;
  return make_dataset(std::move(X), std::move(y), "random");
}

}  // namespace

TEST_CASE("libsvm parsing") {
  SUBCASE("basic line with a gap") {
    std::istringstream in("+1 1:0.5 3:-2\n");
    const Dataset ds = parse_libsvm(in, Index{3});
    CHECK(ds.n() == 1);
    CHECK(ds.dim() == 3);
    CHECK(ds.X(0, 0) == 0.5);
    CHECK(ds.X(0, 1) == 0.0);
    CHECK(ds.X(0, 2) == -2.0);
    CHECK(ds.y[0] == 1.0);
  }
  SUBCASE("label-only line is a zero vector; 0 maps to -1") {
    std::istringstream in("-1\n0 1:1\n");
    const Dataset ds = parse_libsvm(in, Index{2});
    CHECK(ds.y[0] == -1.0);
    CHECK(ds.X.row(0).norm() == 0.0);
    CHECK(ds.y[1] == -1.0);
  }
  SUBCASE("dimension inferred from the max index") {
    std::istringstream in("+1 2:1\n-1 4:2\n+1 1:3\n");
    const Dataset ds = parse_libsvm(in);
    CHECK(ds.n() == 3);
    CHECK(ds.dim() == 4);
  }
  SUBCASE("errors carry line numbers") {
    std::istringstream bad_order("+1 3:1 2:1\n");
    CHECK_THROWS_WITH_AS(parse_libsvm(bad_order),
                         "libsvm line 1: indices not strictly ascending at "
                         "'2:1'",
                         ParseError);
    std::istringstream dup("+1 1:1\n-1 2:1 2:2\n");
    CHECK_THROWS_AS(parse_libsvm(dup), ParseError);
    std::istringstream nonnum("+1 1:abc\n");
    CHECK_THROWS_AS(parse_libsvm(nonnum), ParseError);
    std::istringstream multi("3 1:1\n");
    CHECK_THROWS_AS(parse_libsvm(multi), ParseError);
  }
  SUBCASE("multi-class binarization by positive id") {
    std::istringstream in("3 1:1\n7 1:2\n3 2:1\n");
    const Dataset ds = parse_libsvm(in, {}, 3L);
    CHECK(ds.y[0] == 1.0);
    CHECK(ds.y[1] == -1.0);
    CHECK(ds.y[2] == 1.0);
  }
  SUBCASE("round trip preserves the numeric content") {
    Rng rng(5);
    Matrix X = Matrix::Zero(6, 4);
    Vector y(6);
    for (Index i = 0; i < 6; ++i) {
      y[i] = i % 2 == 0 ? 1.0 : -1.0;
      for (Index j = 0; j < 4; ++j) {
        if (rng.uniform() < 0.6) X(i, j) = rng.normal();
      }
    }
    const Dataset ds = make_dataset(X, y, "rt");
    std::ostringstream out;
    write_libsvm(ds, out);
    std::istringstream in(out.str());
    const Dataset back = parse_libsvm(in, ds.dim());
    CHECK((back.X - ds.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.y - ds.y).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("two-gaussian generator") {
  SyntheticSpec spec;
  spec.n = 1000;
  spec.d = 6;
  spec.p = 0.05;
  spec.delta_mu = 4.0;
  spec.seed = 9;
  const Dataset ds = gen_two_gaussians(spec);
  CHECK(ds.n() == 1000);
  CHECK(ds.count_positives() == 50);

  // identical seeds reproduce the dataset exactly
  const Dataset again = gen_two_gaussians(spec);
  CHECK((ds.X - again.X).cwiseAbs().maxCoeff() == 0.0);

  // the known-optimal direction (the all-ones vector) separates well
  const Vector w = Vector::Ones(6) / std::sqrt(6.0);
  long correct = 0;
  for (Index i = 0; i < ds.n(); ++i) {
    const double s = ds.X.row(i).dot(w);
    if ((s > 0) == (ds.y[i] > 0)) ++correct;
  }
  CHECK(static_cast<double>(correct) / 1000.0 > 0.99);

  SyntheticSpec degenerate = spec;
  degenerate.p = 0.0001;
  CHECK_THROWS_AS(gen_two_gaussians(degenerate), ConfigError);
}

TEST_CASE("split") {
  const Dataset ds = random_dataset(3, 10, 2, 0.5);
  const auto [train, test] = split(ds, 0.8, 1, false);
  CHECK(train.n() == 8);
  CHECK(test.n() == 2);

  SUBCASE("stratified preserves per-class counts") {
    SyntheticSpec spec;
    spec.n = 100;
    spec.d = 2;
    spec.p = 0.3;
    spec.seed = 2;
    const Dataset d100 = gen_two_gaussians(spec);
    const auto [tr, te] = split(d100, 0.5, 7, true);
    CHECK(tr.count_positives() == 15);
    CHECK(te.count_positives() == 15);
    CHECK(tr.n() == 50);
    CHECK(te.n() == 50);
  }

  SUBCASE("the union of the splits is the original multiset") {
    auto key = [](const Dataset& d, Index i) {
      std::ostringstream k;
      k << d.y[i];
      for (Index j = 0; j < d.dim(); ++j) k << ',' << d.X(i, j);
      return k.str();
    };
    std::multiset<std::string> original, recombined;
    for (Index i = 0; i < ds.n(); ++i) original.insert(key(ds, i));
    for (Index i = 0; i < train.n(); ++i) recombined.insert(key(train, i));
    for (Index i = 0; i < test.n(); ++i) recombined.insert(key(test, i));
    CHECK(original == recombined);
  }
}

TEST_CASE("minibatch stream") {
  const Dataset ds = random_dataset(11, 100, 3, 0.5);
  MinibatchStream stream(ds, 32, 5, false);
  CHECK(stream.batches_per_epoch() == 3);  // the short chunk is dropped

  SUBCASE("epochs reshuffle but the schedule is reproducible") {
    std::vector<std::vector<Index>> first_run;
    for (int i = 0; i < 6; ++i) first_run.push_back(stream.next());
    CHECK(first_run[0] != first_run[3]);  // different within-epoch orders

    MinibatchStream replay(ds, 32, 5, false);
    for (int i = 0; i < 6; ++i) CHECK(replay.next() == first_run[i]);
  }

  SUBCASE("stratified batches hold the positive count near b * p_hat") {
    SyntheticSpec spec;
    spec.n = 200;
    spec.d = 2;
    spec.p = 0.1;
    spec.seed = 3;
    const Dataset skewed = gen_two_gaussians(spec);
    MinibatchStream strat(skewed, 20, 9, true);
    for (int i = 0; i < 30; ++i) {
      const auto& idx = strat.next();
      long pos = 0;
      for (Index j : idx) {
        if (skewed.y[j] > 0) ++pos;
      }
      CHECK(pos >= 1);
      CHECK(pos <= 3);  // 20 * 0.1 = 2, within +-1
    }
  }
}

TEST_CASE("drift resampling") {
  SyntheticSpec spec;
  spec.n = 100;
  spec.d = 2;
  spec.p = 0.5;
  spec.seed = 13;
  const Dataset test = gen_two_gaussians(spec);

  const Dataset drifted = drift_resample(test, {0.9, 21});
  CHECK(drifted.n() == 100);
  CHECK(drifted.count_positives() == 90);

  SUBCASE("bootstrap at the original fraction keeps p_hat") {
    const Dataset boot = drift_resample(test, {0.5, 22});
    CHECK(boot.count_positives() == 50);
  }

  SUBCASE("rows are drawn from the matching class pool") {
    auto row_set = [](const Dataset& d, double label) {
      std::set<std::string> s;
      for (Index i = 0; i < d.n(); ++i) {
        if (d.y[i] != label) continue;
        std::ostringstream k;
        for (Index j = 0; j < d.dim(); ++j) k << d.X(i, j) << ',';
        s.insert(k.str());
      }
      return s;
    };
    const auto pos_pool = row_set(test, 1.0);
    const auto pos_drift = row_set(drifted, 1.0);
    for (const auto& row : pos_drift) CHECK(pos_pool.count(row) == 1);
  }

  SUBCASE("drifted prior kld matches the closed form") {
    const double expect = kld({0.5, 0.5}, {0.9, 0.1});
    CHECK(expect == doctest::Approx(0.510826).epsilon(1e-5));
  }
}

TEST_CASE("normalization") {
  const Dataset train = random_dataset(31, 50, 4, 0.5);
  Dataset test = random_dataset(32, 20, 4, 0.5);
  Dataset constant_train = train;
  constant_train.X.col(2).setConstant(3.25);
  test.X.col(2).setConstant(3.25);

  const auto norm = normalize(constant_train, test);
  for (Index j = 0; j < 4; ++j) {
    CHECK(std::abs(norm.train.X.col(j).mean()) <= 1e-12);
  }
  CHECK(norm.train.X.col(2).cwiseAbs().maxCoeff() == 0.0);  // constant -> 0
  CHECK(norm.test.X.col(2).cwiseAbs().maxCoeff() == 0.0);

  // applying the stats twice is not a no-op
  const Matrix twice = norm.stats.apply(norm.train.X);
  CHECK((twice - norm.train.X).cwiseAbs().maxCoeff() > 1e-6);
}
