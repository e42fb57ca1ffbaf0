#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mfd/checkpoint.hpp"
#include "mfd/data_synth.hpp"
#include "mfd/fairness.hpp"
#include "mfd/objectives.hpp"

namespace mfd {

enum class SamplerKind { kPlain, kStratified };

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int epochs = 50;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  int plateau_patience = 10;
  double decay_factor = 10.0;
  AdamConfig adam;
  std::uint64_t seed = 0;
  ObjectiveConfig objective;
  SamplerKind sampler = SamplerKind::kPlain;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
  double deo_a = 0.0;
  double deo_m = 0.0;
  double lr = 0.0;  // rate used for this epoch's updates
};

struct TrainHistory {
  std::vector<EpochRecord> records;

  /// epoch,train_loss,test_loss,test_acc,deo_a,deo_m,lr
  std::string to_csv() const;
};

/// Divides the learning rate by `factor` once the monitored loss has gone
/// `patience` consecutive epochs without a strict decrease, then restarts
/// the count.
class PlateauScheduler {
 public:
  PlateauScheduler(double initial_lr, int patience, double factor);

  /// Feeds one epoch's loss; returns true if the rate was decayed.
  bool observe(double loss);
  double lr() const { return lr_; }
  int decays() const { return decays_; }

 private:
  double lr_;
  int patience_;
  double factor_;
  double best_;
  bool has_best_ = false;
  int bad_epochs_ = 0;
  int decays_ = 0;
};

class Adam {
 public:
  Adam(const MlpParams& shape, AdamConfig config);

  /// One bias-corrected Adam update; `grads` follows MlpParams::flatten order
  /// (weight, bias per layer).
  void step(MlpParams& params, std::span<const Tensor> grads, double lr);
  long steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  long t_ = 0;
};

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;  // mean cross entropy
  DeoReport report;
};

Evaluation evaluate(const MlpParams& params, const LabeledDataset& data);
Evaluation evaluate(const ModelCheckpoint& checkpoint, const LabeledDataset& data);

struct TrainResult {
  ModelCheckpoint checkpoint;
  TrainHistory history;
};

Batch make_batch(const LabeledDataset& data, std::span<const std::size_t> rows);

/// Runs config.epochs epochs of Adam on `config.objective`, evaluating on
/// `test` after each epoch and decaying the rate on test-loss plateaus.
/// Fully determined by (data, config). Throws TrainingError on a
/// non-finite loss and ConfigError on teacher/spec mismatches.
TrainResult train(const LabeledDataset& train_set, const LabeledDataset& test_set,
                  const MlpSpec& spec, const TrainConfig& config,
                  const ModelCheckpoint* teacher = nullptr);

struct RunMetrics {
  double accuracy = 0.0;
  double deo_a = 0.0;
  double deo_m = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
};

MetricSummary summarize(std::span<const double> values);

struct SeedSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<RunMetrics> runs;
  MetricSummary accuracy;
  MetricSummary deo_a;
  MetricSummary deo_m;
};

/// Runs `run(base_seed + i)` for i in [0, k) and aggregates. With
/// `concurrent` the runs execute in parallel; results are merged in seed
/// order either way. Throws ParameterError if k < 2.
SeedSummary multi_seed_run(const std::function<RunMetrics(std::uint64_t)>& run,
                           std::uint64_t base_seed, int k = 4, bool concurrent = false);

}  // namespace mfd
