#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfd/tensor.hpp"

namespace mfd {

/// Synthetic analog of a colour/grayscale skewed image benchmark.
///
/// Class means lie on the all-ones direction u = 1/sqrt(d) at seed-drawn
/// positions at least `class_sep` apart, so the coordinate mean of a sample
/// is a sufficient statistic for its class. Group 0 keeps the raw sample;
/// group 1 ("grayscale") replaces it by its coordinate mean repeated d times
/// plus a fixed offset orthogonal to u. Both renderings are therefore equally
/// informative about the class, but the group is trivially detectable, which
/// is what lets a skewed training set teach a group-dependent class prior.
struct SynthConfig {
  int num_classes = 4;
  int dim = 20;
  int n_per_class = 2000;
  double skew = 0.8;
  double class_sep = 2.0;
  double noise_std = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr int kNumGroups = 2;

struct LabeledDataset {
  Tensor features;  // N x d
  std::vector<int> labels;
  std::vector<int> groups;
  int num_classes = 0;
  int num_groups = kNumGroups;
  std::uint64_t seed = 0;
  double skew = 0.5;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.rank() == 2 ? features.cols() : 0; }
  /// Count of samples in (group, class).
  std::size_t count(int group, int label) const;
  void validate() const;
};

/// Class-mean positions along u for a config (deterministic in the seed).
std::vector<double> class_positions(const SynthConfig& config);

/// Skewed training set: for classes 0..M/2-1 floor(skew * n) samples are
/// rendered in group 1 and the rest in group 0; the other classes mirror it.
LabeledDataset generate_skewed(const SynthConfig& config);

/// Balanced test set: each base sample is emitted twice, group 0 then group 1
/// at adjacent indices.
LabeledDataset make_balanced_test(const SynthConfig& config, int n_test_per_class);

/// Per-(group, class) quotas for one stratified batch, in ascending (a, y)
/// order: floor(batch / cells) each, with the remainder spread one apiece
/// from the front.
std::vector<std::size_t> stratified_quotas(int num_groups, int num_classes, std::size_t batch_size);

/// One epoch of stratified batches (ceil(N / batch) of them). Each batch
/// draws its quotas with replacement from the matching cell pool. Throws
/// ConfigError if any cell is empty.
std::vector<std::vector<std::size_t>> stratified_batches(const LabeledDataset& dataset,
                                                         std::size_t batch_size,
                                                         std::uint64_t seed);

/// One epoch of a shuffled pass over all samples; the last batch may be short.
std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t num_samples,
                                                       std::size_t batch_size, std::uint64_t seed);

}  // namespace mfd
