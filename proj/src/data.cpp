#include "nondecomp/data.hpp"

#include "nondecomp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace nondecomp {

double Dataset::positive_fraction() const {
  if (n() == 0) return 0.0;
  return static_cast<double>(count_positives()) / static_cast<double>(n());
}

long Dataset::count_positives() const {
  long c = 0;
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0) ++c;
  }
  return c;
}

void Dataset::validate() const {
  if (X.rows() != y.size()) throw ShapeError("dataset: X/y size mismatch");
  if (!X.allFinite()) throw NumericError("dataset: non-finite feature");
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] != 1.0 && y[i] != -1.0) {
      throw DomainError("dataset: label not in {-1,+1}");
    }
  }
}

Dataset make_dataset(Matrix X, Vector y, std::string name) {
  Dataset ds{std::move(X), std::move(y), std::move(name)};
  ds.validate();
  return ds;
}

namespace {

[[noreturn]] void parse_fail(long line_no, const std::string& what) {
  throw ParseError("libsvm line " + std::to_string(line_no) + ": " + what);
}

double parse_number(const std::string& tok, long line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    parse_fail(line_no, "non-numeric value '" + tok + "'");
  }
  if (pos != tok.size()) {
    parse_fail(line_no, "trailing characters in '" + tok + "'");
  }
  return v;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<Index> expected_dim,
                     std::optional<long> positive_class, std::string name) {
  std::vector<std::vector<std::pair<Index, double>>> rows;
  std::vector<double> labels;
  Index max_index = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;  // blank line

    const double raw_label = parse_number(tok, line_no);
    double label = 0.0;
    if (positive_class.has_value()) {
      label = raw_label == static_cast<double>(*positive_class) ? 1.0 : -1.0;
    } else if (raw_label == 1.0) {
      label = 1.0;
    } else if (raw_label == -1.0 || raw_label == 0.0) {
      label = -1.0;  // {0,-1} -> -1 (a9a convention)
    } else {
      parse_fail(line_no, "label " + tok +
                              " looks multi-class; supply a positive class id");
    }

    std::vector<std::pair<Index, double>> feats;
    Index prev_index = 0;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        parse_fail(line_no, "expected index:value, got '" + tok + "'");
      }
      const double idx_raw = parse_number(tok.substr(0, colon), line_no);
      const Index idx = static_cast<Index>(idx_raw);
      if (idx_raw != static_cast<double>(idx) || idx < 1) {
        parse_fail(line_no, "bad feature index '" + tok + "'");
      }
      if (idx <= prev_index) {
        parse_fail(line_no, "indices not strictly ascending at '" + tok + "'");
      }
      const double value = parse_number(tok.substr(colon + 1), line_no);
      if (!std::isfinite(value)) parse_fail(line_no, "non-finite value");
      if (expected_dim.has_value() && idx > *expected_dim) {
        parse_fail(line_no, "index " + std::to_string(idx) +
                                " exceeds expected dimension " +
                                std::to_string(*expected_dim));
      }
      prev_index = idx;
      feats.emplace_back(idx, value);
    }
    max_index = std::max(max_index, prev_index);
    rows.push_back(std::move(feats));
    labels.push_back(label);
  }

  const Index n = static_cast<Index>(rows.size());
  const Index d = expected_dim.value_or(max_index);
  Matrix X = Matrix::Zero(n, d);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    y[i] = labels[static_cast<std::size_t>(i)];
    for (const auto& [idx, value] : rows[static_cast<std::size_t>(i)]) {
      X(i, idx - 1) = value;
    }
  }
  return make_dataset(std::move(X), std::move(y), std::move(name));
}

Dataset load_libsvm(const std::string& path, std::optional<Index> expected_dim,
                    std::optional<long> positive_class) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);
  return parse_libsvm(in, expected_dim, positive_class, path);
}

void write_libsvm(const Dataset& ds, std::ostream& out) {
  char buf[64];
  for (Index i = 0; i < ds.n(); ++i) {
    out << (ds.y[i] > 0.0 ? "+1" : "-1");
    for (Index j = 0; j < ds.dim(); ++j) {
      if (ds.X(i, j) != 0.0) {
        std::snprintf(buf, sizeof(buf), "%.17g", ds.X(i, j));
        out << ' ' << (j + 1) << ':' << buf;
      }
    }
    out << '\n';
  }
}

Dataset gen_two_gaussians(const SyntheticSpec& spec) {
  if (!(spec.p > 0.0 && spec.p < 1.0)) {
    throw ConfigError("synthetic: p must lie in (0,1)");
  }
  if (spec.n < 10) throw ConfigError("synthetic: n must be >= 10");
  const Index n_pos =
      static_cast<Index>(std::llround(static_cast<double>(spec.n) * spec.p));
  if (n_pos <= 0 || n_pos >= spec.n) {
    throw ConfigError("synthetic: degenerate class counts");
  }
  const double mu =
      spec.delta_mu / std::sqrt(static_cast<double>(spec.d));
  Rng rng(spec.seed);
  Matrix X(spec.n, spec.d);
  Vector y(spec.n);
  for (Index i = 0; i < spec.n; ++i) {
    const bool positive = i < n_pos;
    const double mean = positive ? mu : -mu;
    const double sigma = positive ? spec.sigma_pos : spec.sigma_neg;
    for (Index j = 0; j < spec.d; ++j) {
      X(i, j) = mean + sigma * rng.normal();
    }
    y[i] = positive ? 1.0 : -1.0;
  }
  char label[96];
  std::snprintf(label, sizeof(label), "synthetic(n=%ld,d=%ld,p=%g,dmu=%g)",
                static_cast<long>(spec.n), static_cast<long>(spec.d), spec.p,
                spec.delta_mu);
  return make_dataset(std::move(X), std::move(y), label);
}

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<Index>& idx,
                  const std::string& suffix) {
  Matrix X(static_cast<Index>(idx.size()), ds.dim());
  Vector y(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    X.row(static_cast<Index>(i)) = ds.X.row(idx[i]);
    y[static_cast<Index>(i)] = ds.y[idx[i]];
  }
  return make_dataset(std::move(X), std::move(y), ds.name + suffix);
}

}  // namespace

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed, bool stratified) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split: train_fraction must lie in (0,1)");
  }
  Rng rng(seed);
  std::vector<Index> train_idx, test_idx;
  if (stratified) {
    std::vector<Index> pos, neg;
    for (Index i = 0; i < ds.n(); ++i) {
      (ds.y[i] > 0.0 ? pos : neg).push_back(i);
    }
    for (auto* pool : {&pos, &neg}) {
      rng.shuffle(*pool);
      const auto k = static_cast<std::size_t>(std::llround(
          train_fraction * static_cast<double>(pool->size())));
      for (std::size_t i = 0; i < pool->size(); ++i) {
        (i < k ? train_idx : test_idx).push_back((*pool)[i]);
      }
    }
  } else {
    auto perm = rng.permutation(ds.n());
    const auto k = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(ds.n())));
    for (std::size_t i = 0; i < perm.size(); ++i) {
      (i < k ? train_idx : test_idx).push_back(perm[i]);
    }
  }
  auto train = take_rows(ds, train_idx, "/train");
  auto test = take_rows(ds, test_idx, "/test");
  if (!stratified) {
    for (const Dataset* part : {&train, &test}) {
      const long pos = part->count_positives();
      if (pos == 0 || pos == part->n()) {
        std::fprintf(stderr, "warning: split lost a class in %s\n",
                     part->name.c_str());
      }
    }
  }
  return {std::move(train), std::move(test)};
}

MinibatchStream::MinibatchStream(const Dataset& ds, Index batch_size,
                                 std::uint64_t seed, bool stratified)
    : n_(ds.n()), b_(batch_size), stratified_(stratified), state_seed_(seed) {
  if (b_ < 1 || b_ > n_) throw ConfigError("minibatch: bad batch size");
  batches_per_epoch_ = n_ / b_;  // short final chunk dropped
  if (stratified_) {
    for (Index i = 0; i < n_; ++i) {
      (ds.y[i] > 0.0 ? pos_idx_ : neg_idx_).push_back(i);
    }
  }
  cursor_ = batches_per_epoch_;  // force a reshuffle on first next()
}

void MinibatchStream::reshuffle() {
  ++epoch_;
  Rng rng(mix_seed(state_seed_, static_cast<std::uint64_t>(epoch_)));
  order_.clear();
  if (!stratified_) {
    order_ = rng.permutation(n_);
    return;
  }
  auto pos = pos_idx_;
  auto neg = neg_idx_;
  rng.shuffle(pos);
  rng.shuffle(neg);
  // Bresenham-style allocation keeps each batch within +-1 of b * p_hat.
  const double p_hat =
      static_cast<double>(pos.size()) / static_cast<double>(n_);
  std::size_t pos_cursor = 0, neg_cursor = 0;
  double target = 0.0;
  long assigned = 0;
  for (Index k = 0; k < batches_per_epoch_; ++k) {
    target += static_cast<double>(b_) * p_hat;
    long want = std::llround(target) - assigned;
    want = std::min<long>(want, static_cast<long>(pos.size() - pos_cursor));
    const long neg_want =
        std::min<long>(b_ - want, static_cast<long>(neg.size() - neg_cursor));
    for (long i = 0; i < want; ++i) order_.push_back(pos[pos_cursor++]);
    for (long i = 0; i < neg_want; ++i) order_.push_back(neg[neg_cursor++]);
    assigned += want;
  }
}

const std::vector<Index>& MinibatchStream::next() {
  if (cursor_ >= batches_per_epoch_) {
    reshuffle();
    cursor_ = 0;
  }
  current_.assign(
      order_.begin() + static_cast<std::ptrdiff_t>(cursor_ * b_),
      order_.begin() + static_cast<std::ptrdiff_t>((cursor_ + 1) * b_));
  ++cursor_;
  return current_;
}

std::pair<Matrix, Vector> gather(const Dataset& ds,
                                 const std::vector<Index>& indices) {
  Matrix X(static_cast<Index>(indices.size()), ds.dim());
  Vector y(static_cast<Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    X.row(static_cast<Index>(i)) = ds.X.row(indices[i]);
    y[static_cast<Index>(i)] = ds.y[indices[i]];
  }
  return {std::move(X), std::move(y)};
}

Dataset drift_resample(const Dataset& test, const DriftSpec& spec) {
  if (!(spec.p_prime > 0.0 && spec.p_prime < 1.0)) {
    throw ConfigError("drift: p_prime must lie in (0,1)");
  }
  std::vector<Index> pos, neg;
  for (Index i = 0; i < test.n(); ++i) {
    (test.y[i] > 0.0 ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw DomainError("drift: test set must contain both classes");
  }
  const Index n = test.n();
  const Index n_pos = static_cast<Index>(
      std::llround(static_cast<double>(n) * spec.p_prime));
  Rng rng(spec.seed);
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n_pos; ++i) {
    idx.push_back(pos[rng.below(pos.size())]);
  }
  for (Index i = n_pos; i < n; ++i) {
    idx.push_back(neg[rng.below(neg.size())]);
  }
  return take_rows(test, idx, "/drift");
}

Matrix NormalizeStats::apply(const Matrix& X) const {
  if (X.cols() != mean.size()) throw ShapeError("normalize: dim mismatch");
  Matrix out = X;
  for (Index j = 0; j < X.cols(); ++j) {
    if (stdev[j] > 0.0) {
      out.col(j) = (X.col(j).array() - mean[j]) / stdev[j];
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

NormalizedSplit normalize(const Dataset& train, const Dataset& test) {
  NormalizeStats stats;
  stats.mean = train.X.colwise().mean();
  stats.stdev = Vector(train.dim());
  for (Index j = 0; j < train.dim(); ++j) {
    const double var =
        (train.X.col(j).array() - stats.mean[j]).square().mean();
    stats.stdev[j] = std::sqrt(var);
  }
  NormalizedSplit out{
      make_dataset(stats.apply(train.X), train.y, train.name),
      make_dataset(stats.apply(test.X), test.y, test.name), stats};
  return out;
}

}  // namespace nondecomp
