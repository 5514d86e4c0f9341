#pragma once

#include "nondecomp/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nondecomp {

struct Dataset {
  Matrix X;  // n x d, dense
  Vector y;  // entries in {-1, +1}
  std::string name;

  Index n() const { return X.rows(); }
  Index dim() const { return X.cols(); }
  double positive_fraction() const;
  long count_positives() const;

  void validate() const;  // finite features, labels in {-1,+1}
};

Dataset make_dataset(Matrix X, Vector y, std::string name);

// LIBSVM sparse text format: "label idx:value ..." with 1-based, strictly
// ascending indices. Labels {+1,1} map to +1 and {-1,0} to -1; other labels
// are rejected unless positive_class is supplied, in which case
// y = +1 iff label == positive_class. Parse errors carry line numbers.
Dataset parse_libsvm(std::istream& in, std::optional<Index> expected_dim = {},
                     std::optional<long> positive_class = {},
                     std::string name = "libsvm");
Dataset load_libsvm(const std::string& path,
                    std::optional<Index> expected_dim = {},
                    std::optional<long> positive_class = {});

// Non-zero entries only; parse(write(ds)) reproduces the numeric content.
void write_libsvm(const Dataset& ds, std::ostream& out);

// Two spherical Gaussians at +-delta_mu * 1/sqrt(d) with exactly
// round(n * p) positives (positives first, then negatives).
struct SyntheticSpec {
  Index n = 1000;
  Index d = 10;
  double p = 0.1;
  double delta_mu = 2.0;
  double sigma_pos = 1.0;
  double sigma_neg = 1.0;
  std::uint64_t seed = 0;
};

Dataset gen_two_gaussians(const SyntheticSpec& spec);

// Seeded permutation split; stratified preserves the positive fraction
// within +-1 sample per class. Non-stratified class extinction only warns.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed, bool stratified);

// Per-epoch seeded permutation cut into consecutive chunks of b; a short
// final chunk is dropped. Stratified mode interleaves class-wise
// permutations keeping each batch's positive count within +-1 of b * p_hat.
class MinibatchStream {
 public:
  MinibatchStream(const Dataset& ds, Index batch_size, std::uint64_t seed,
                  bool stratified);

  const std::vector<Index>& next();
  Index batches_per_epoch() const { return batches_per_epoch_; }
  long epoch() const { return epoch_; }

 private:
  void reshuffle();

  Index n_ = 0;
  Index b_ = 0;
  bool stratified_ = false;
  std::vector<Index> pos_idx_, neg_idx_;  // stratified pools
  std::vector<Index> order_;              // current epoch order
  std::vector<Index> current_;
  Index cursor_ = 0;  // batch index within epoch
  Index batches_per_epoch_ = 0;
  long epoch_ = -1;
  std::uint64_t state_seed_ = 0;  // advanced once per epoch
};

std::pair<Matrix, Vector> gather(const Dataset& ds,
                                 const std::vector<Index>& indices);

// Class-wise resampling with replacement to a target positive fraction;
// output size equals the input size.
struct DriftSpec {
  double p_prime = 0.5;
  std::uint64_t seed = 0;
};

Dataset drift_resample(const Dataset& test, const DriftSpec& spec);

// Per-feature affine map to zero mean / unit variance, fit on train only.
// Zero-variance features map to 0. Applying stats twice is not a no-op.
struct NormalizeStats {
  Vector mean;
  Vector stdev;

  Matrix apply(const Matrix& X) const;
};

struct NormalizedSplit {
  Dataset train;
  Dataset test;
  NormalizeStats stats;
};

NormalizedSplit normalize(const Dataset& train, const Dataset& test);

}  // namespace nondecomp
