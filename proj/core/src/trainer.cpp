#include "mfd/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include "mfd/errors.hpp"
#include "mfd/random.hpp"

namespace mfd {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("train: learning rate must be non-negative");
  if (plateau_patience < 1) throw ConfigError("train: plateau patience must be >= 1");
  if (!(decay_factor > 1.0)) throw ConfigError("train: decay factor must exceed 1");
  objective.validate();
}

std::string TrainHistory::to_csv() const {
  std::string out = "epoch,train_loss,test_loss,test_acc,deo_a,deo_m,lr\n";
  char line[256];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch,
                  r.train_loss, r.test_loss, r.test_acc, r.deo_a, r.deo_m, r.lr);
    out += line;
  }
  return out;
}

PlateauScheduler::PlateauScheduler(double initial_lr, int patience, double factor)
    : lr_(initial_lr), patience_(patience), factor_(factor), best_(0.0) {}

bool PlateauScheduler::observe(double loss) {
  if (!has_best_ || loss < best_) {
    best_ = loss;
    has_best_ = true;
    bad_epochs_ = 0;
    return false;
  }
  if (++bad_epochs_ < patience_) return false;
  lr_ /= factor_;
  ++decays_;
  bad_epochs_ = 0;
  return true;
}

Adam::Adam(const MlpParams& shape, AdamConfig config) : config_(config) {
  for (const auto& l : shape.layers) {
    m_.push_back(Tensor::zeros_like(l.weight));
    m_.push_back(Tensor::zeros_like(l.bias));
  }
  v_ = m_;
}

void Adam::step(MlpParams& params, std::span<const Tensor> grads, double lr) {
  if (grads.size() != m_.size()) throw ShapeError("Adam::step: gradient count differs from parameters");
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < grads.size(); ++k) {
    auto& layer = params.layers[k / 2];
    auto w = (k % 2 == 0 ? layer.weight : layer.bias).values();
    auto g = grads[k].values();
    auto m = m_[k].values();
    auto v = v_[k].values();
    if (g.size() != w.size()) throw ShapeError("Adam::step: gradient shape differs from parameter");
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

Batch make_batch(const LabeledDataset& data, std::span<const std::size_t> rows) {
  Batch b;
  b.features = gather_rows(data.features, rows);
  b.labels.reserve(rows.size());
  b.groups.reserve(rows.size());
  for (std::size_t r : rows) {
    b.labels.push_back(data.labels[r]);
    b.groups.push_back(data.groups[r]);
  }
  return b;
}

Evaluation evaluate(const MlpParams& params, const LabeledDataset& data) {
  const MlpOutput out = mlp_forward(params, data.features);
  std::vector<int> preds(data.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto z = out.logits.row(i);
    std::size_t best = 0;
    double mx = z[0];
    for (std::size_t j = 1; j < z.size(); ++j) {
      if (z[j] > mx) {
        mx = z[j];
        best = j;
      }
    }
    preds[i] = static_cast<int>(best);
    double s = 0.0;
    for (double v : z) s += std::exp(v - mx);
    loss += mx + std::log(s) - z[static_cast<std::size_t>(data.labels[i])];
  }
  Evaluation e;
  e.loss = data.size() == 0 ? 0.0 : loss / static_cast<double>(data.size());
  e.report = deo_metrics(group_class_accuracy(preds, data.labels, data.groups,
                                              static_cast<std::size_t>(data.num_classes),
                                              static_cast<std::size_t>(data.num_groups)));
  e.accuracy = e.report.overall_accuracy;
  return e;
}

Evaluation evaluate(const ModelCheckpoint& checkpoint, const LabeledDataset& data) {
  if (checkpoint.params.spec.input_dim() != data.dim()) {
    throw ShapeError("evaluate: checkpoint input dimension differs from the dataset");
  }
  return evaluate(checkpoint.params, data);
}

TrainResult train(const LabeledDataset& train_set, const LabeledDataset& test_set,
                  const MlpSpec& spec, const TrainConfig& config, const ModelCheckpoint* teacher) {
  config.validate();
  spec.validate();
  train_set.validate();
  if (spec.input_dim() != train_set.dim() ||
      spec.num_classes() != static_cast<std::size_t>(train_set.num_classes)) {
    throw ConfigError("train: network spec does not match the training data");
  }
  const bool needs_teacher = method_needs_teacher(config.objective.method);
  if (needs_teacher && teacher == nullptr) {
    throw ConfigError(std::string("train: method ") +
                      std::string(method_name(config.objective.method)) + " requires a teacher");
  }
  if (!needs_teacher) teacher = nullptr;
  if (teacher && !(teacher->params.spec == spec)) {
    throw ConfigError("train: teacher architecture differs from the student");
  }

  MlpParams params = init_params(spec, config.seed);
  Adam adam(params, config.adam);
  PlateauScheduler plateau(config.learning_rate, config.plateau_patience, config.decay_factor);
  TrainHistory history;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::uint64_t epoch_seed = splitmix64(config.seed) ^ static_cast<std::uint64_t>(epoch);
    const auto batches = config.sampler == SamplerKind::kStratified
                             ? stratified_batches(train_set, config.batch_size, epoch_seed)
                             : shuffled_batches(train_set.size(), config.batch_size, epoch_seed);
    const double lr = plateau.lr();
    double loss_sum = 0.0;
    std::size_t step = 0;
    for (const auto& rows : batches) {
      ++step;
      const Batch batch = make_batch(train_set, rows);
      Graph g;
      const MlpVars student = bind_parameters(g, params, true);
      std::optional<MlpVars> frozen;
      if (teacher) frozen = bind_parameters(g, teacher->params, false);
      Var loss = build_objective(batch, frozen ? &*frozen : nullptr, student, config.objective);
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        throw TrainingError("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                            ", step " + std::to_string(step));
      }
      loss_sum += value;
      g.backward(loss);
      const auto grads = collect_gradients(student);
      adam.step(params, grads, lr);
    }

    const Evaluation eval = evaluate(params, test_set);
    history.records.push_back(EpochRecord{epoch, loss_sum / static_cast<double>(batches.size()),
                                          eval.loss, eval.accuracy, eval.report.deo_a,
                                          eval.report.deo_m, lr});
    plateau.observe(eval.loss);
  }

  CheckpointMeta meta;
  meta.seed = config.seed;
  meta.method = std::string(method_name(config.objective.method));
  meta.epoch = config.epochs;
  meta.hyper["lambda"] = config.objective.lambda;
  meta.hyper["temperature"] = config.objective.temperature;
  meta.hyper["kd_weight"] = config.objective.kd_weight;
  meta.hyper["skew"] = train_set.skew;
  meta.hyper["stratified"] = config.sampler == SamplerKind::kStratified ? 1.0 : 0.0;
  return TrainResult{make_checkpoint(params, std::move(meta)), std::move(history)};
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  // deviations are taken from the first value so identical inputs give an
  // exact mean and a zero spread
  const double shift = values.front();
  const double n = static_cast<double>(values.size());
  double offset = 0.0;
  for (double v : values) offset += v - shift;
  offset /= n;
  s.mean = shift + offset;
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - shift - offset) * (v - shift - offset);
  s.std = std::sqrt(ss / (n - 1.0));
  return s;
}

SeedSummary multi_seed_run(const std::function<RunMetrics(std::uint64_t)>& run,
                           std::uint64_t base_seed, int k, bool concurrent) {
  if (k < 2) throw ParameterError("multi_seed_run: need at least two seeds");
  SeedSummary out;
  for (int i = 0; i < k; ++i) out.seeds.push_back(base_seed + static_cast<std::uint64_t>(i));
  if (concurrent) {
    std::vector<std::future<RunMetrics>> futures;
    for (auto seed : out.seeds) futures.push_back(std::async(std::launch::async, run, seed));
    for (auto& f : futures) out.runs.push_back(f.get());
  } else {
    for (auto seed : out.seeds) out.runs.push_back(run(seed));
  }
  std::vector<double> acc, da, dm;
  for (const auto& r : out.runs) {
    acc.push_back(r.accuracy);
    da.push_back(r.deo_a);
    dm.push_back(r.deo_m);
  }
  out.accuracy = summarize(acc);
  out.deo_a = summarize(da);
  out.deo_m = summarize(dm);
  return out;
}

}  // namespace mfd
