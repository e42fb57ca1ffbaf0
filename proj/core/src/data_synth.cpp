#include "mfd/data_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mfd/errors.hpp"
#include "mfd/random.hpp"

namespace mfd {
namespace {

// Offset added to group-1 renderings: alternating +/- pattern with its mean
// removed (orthogonal to the all-ones direction), scaled to half the noise.
std::vector<double> group_offset(const SynthConfig& c) {
  std::vector<double> v(static_cast<std::size_t>(c.dim));
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = (k % 2 == 0) ? 1.0 : -1.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double norm = 0.0;
  for (double& x : v) {
    x -= m;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x = norm > 0.0 ? 0.5 * c.noise_std * x / norm : 0.0;
  return v;
}

struct Renderer {
  const SynthConfig& config;
  std::vector<double> positions;
  std::vector<double> offset;

  explicit Renderer(const SynthConfig& c)
      : config(c), positions(class_positions(c)), offset(group_offset(c)) {}

  std::vector<double> base_sample(int label, Rng& rng) const {
    const std::size_t d = static_cast<std::size_t>(config.dim);
    const double along = positions[static_cast<std::size_t>(label)] / std::sqrt(static_cast<double>(d));
    std::vector<double> x(d);
    for (double& v : x) v = along + config.noise_std * rng.normal();
    return x;
  }

  void render(std::span<const double> base, int group, std::span<double> out) const {
    if (group == 0) {
      std::copy(base.begin(), base.end(), out.begin());
      return;
    }
    const double m = std::accumulate(base.begin(), base.end(), 0.0) / static_cast<double>(base.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = m + offset[k];
  }
};

int majority_group(int label, int num_classes) { return label < num_classes / 2 ? 1 : 0; }

}  // namespace

void SynthConfig::validate() const {
  if (num_classes < 2 || num_classes % 2 != 0) {
    throw ParameterError("SynthConfig: class count must be even and >= 2");
  }
  if (dim < 1) throw ParameterError("SynthConfig: dim must be >= 1");
  if (n_per_class < 1) throw ParameterError("SynthConfig: n_per_class must be >= 1");
  if (!(skew >= 0.5 && skew <= 1.0)) throw ParameterError("SynthConfig: skew must lie in [0.5, 1]");
  if (!(class_sep > 0.0)) throw ParameterError("SynthConfig: class_sep must be positive");
  if (!(noise_std > 0.0)) throw ParameterError("SynthConfig: noise_std must be positive");
}

std::size_t LabeledDataset::count(int group, int label) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (groups[i] == group && labels[i] == label) ++n;
  }
  return n;
}

void LabeledDataset::validate() const {
  if (features.rank() != 2 || features.rows() != labels.size() || labels.size() != groups.size()) {
    throw ShapeError("LabeledDataset: feature rows, labels and groups must agree in length");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes || groups[i] < 0 || groups[i] >= num_groups) {
      throw DomainError("LabeledDataset: label or group out of range at row " + std::to_string(i));
    }
  }
}

std::vector<double> class_positions(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed, stream::kClassMeans);
  const std::size_t m = static_cast<std::size_t>(config.num_classes);
  double span = config.class_sep * static_cast<double>(m);
  std::vector<double> pos(m);
  for (int attempt = 0;; ++attempt) {
    for (double& p : pos) p = rng.uniform(0.0, span);
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (std::abs(pos[i] - pos[j]) < config.class_sep) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return pos;
    if (attempt % 1000 == 999) span *= 1.5;
  }
}

LabeledDataset generate_skewed(const SynthConfig& config) {
  config.validate();
  const Renderer renderer(config);
  Rng rng(config.seed, stream::kTrainSamples);
  const std::size_t d = static_cast<std::size_t>(config.dim);
  const std::size_t n = static_cast<std::size_t>(config.n_per_class);
  const std::size_t majority =
      static_cast<std::size_t>(std::floor(config.skew * static_cast<double>(n)));

  LabeledDataset ds;
  ds.num_classes = config.num_classes;
  ds.seed = config.seed;
  ds.skew = config.skew;
  ds.features = Tensor(n * static_cast<std::size_t>(config.num_classes), d);
  std::size_t row = 0;
  for (int y = 0; y < config.num_classes; ++y) {
    const int major = majority_group(y, config.num_classes);
    for (std::size_t i = 0; i < n; ++i, ++row) {
      const int group = i < majority ? major : 1 - major;
      const auto base = renderer.base_sample(y, rng);
      renderer.render(base, group, ds.features.row(row));
      ds.labels.push_back(y);
      ds.groups.push_back(group);
    }
  }
  return ds;
}

LabeledDataset make_balanced_test(const SynthConfig& config, int n_test_per_class) {
  config.validate();
  if (n_test_per_class < 1) throw ParameterError("make_balanced_test: n_test_per_class must be >= 1");
  const Renderer renderer(config);
  Rng rng(config.seed, stream::kTestSamples);
  const std::size_t d = static_cast<std::size_t>(config.dim);
  const std::size_t n = static_cast<std::size_t>(n_test_per_class);

  LabeledDataset ds;
  ds.num_classes = config.num_classes;
  ds.seed = config.seed;
  ds.skew = 0.5;
  ds.features = Tensor(2 * n * static_cast<std::size_t>(config.num_classes), d);
  std::size_t row = 0;
  for (int y = 0; y < config.num_classes; ++y) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto base = renderer.base_sample(y, rng);
      for (int group = 0; group < kNumGroups; ++group, ++row) {
        renderer.render(base, group, ds.features.row(row));
        ds.labels.push_back(y);
        ds.groups.push_back(group);
      }
    }
  }
  return ds;
}

std::vector<std::size_t> stratified_quotas(int num_groups, int num_classes, std::size_t batch_size) {
  if (num_groups < 1 || num_classes < 1) throw ConfigError("stratified_quotas: empty cell grid");
  const std::size_t cells = static_cast<std::size_t>(num_groups) * static_cast<std::size_t>(num_classes);
  std::vector<std::size_t> quotas(cells, batch_size / cells);
  for (std::size_t i = 0; i < batch_size % cells; ++i) ++quotas[i];
  return quotas;
}

std::vector<std::vector<std::size_t>> stratified_batches(const LabeledDataset& dataset,
                                                         std::size_t batch_size,
                                                         std::uint64_t seed) {
  if (batch_size == 0) throw ConfigError("stratified_batches: batch size must be positive");
  const int groups = dataset.num_groups, classes = dataset.num_classes;
  std::vector<std::vector<std::size_t>> pools(static_cast<std::size_t>(groups * classes));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    pools[static_cast<std::size_t>(dataset.groups[i] * classes + dataset.labels[i])].push_back(i);
  }
  for (std::size_t c = 0; c < pools.size(); ++c) {
    if (pools[c].empty()) {
      throw ConfigError("stratified_batches: no samples for (group " +
                        std::to_string(c / static_cast<std::size_t>(classes)) + ", class " +
                        std::to_string(c % static_cast<std::size_t>(classes)) + ")");
    }
  }
  const auto quotas = stratified_quotas(groups, classes, batch_size);
  const std::size_t num_batches = (dataset.size() + batch_size - 1) / batch_size;
  Rng rng(seed, stream::kSampler);
  std::vector<std::vector<std::size_t>> batches(num_batches);
  for (auto& batch : batches) {
    batch.reserve(batch_size);
    for (std::size_t c = 0; c < pools.size(); ++c) {
      for (std::size_t q = 0; q < quotas[c]; ++q) {
        batch.push_back(pools[c][rng.below(pools[c].size())]);
      }
    }
  }
  return batches;
}

std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t num_samples,
                                                       std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw ConfigError("shuffled_batches: batch size must be positive");
  std::vector<std::size_t> order(num_samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, stream::kSampler);
  for (std::size_t i = num_samples; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < num_samples; start += batch_size) {
    const std::size_t stop = std::min(num_samples, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

}  // namespace mfd
