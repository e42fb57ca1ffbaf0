#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfd/data_synth.hpp"
#include "mfd/mlp.hpp"
#include "mfd/report.hpp"
#include "mfd/trainer.hpp"
#include "mfd/verify.hpp"

namespace mfd {

/// A distillation scheme in the method matrix: objective plus sampler under
/// a display tag ("SS" is CE with the stratified sampler).
struct MethodSpec {
  std::string tag;
  ObjectiveConfig objective;
  SamplerKind sampler = SamplerKind::kPlain;
};

/// Stratified for MFD, MFD-F and the "SS" tag, plain otherwise.
SamplerKind default_sampler(Method method, const std::string& tag);

struct ExperimentConfig {
  std::uint64_t seed = 0;  // root of all randomness
  SynthConfig synth;
  int n_test_per_class = 1000;
  MlpSpec spec;  // empty = standard network for the data
  TrainConfig train;
  MethodSpec distill{"MFD", ObjectiveConfig{Method::kMfd, 3.0, 1.0, 0.5, {}}, SamplerKind::kStratified};
  std::vector<MethodSpec> methods;
  std::filesystem::path output_dir = "mfd_out";
  int runs = 4;

  MlpSpec resolved_spec() const;
  void validate() const;
};

/// Parses a UTF-8 JSON document. Unknown keys and wrong types raise
/// ConfigError naming the offending key. Missing keys keep defaults.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_json(const ExperimentConfig& config);

/// Command-line overrides; applied on top of the file (flag > file > default).
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<double> lambda;
  std::optional<std::filesystem::path> out;
  std::optional<int> runs;
};

void apply_overrides(ExperimentConfig& config, const Overrides& overrides);

/// Per-role seeds derived from the root so data, teacher and student draws
/// are independent yet fully determined.
std::uint64_t teacher_seed(std::uint64_t root);
std::uint64_t student_seed(std::uint64_t root);

/// Skewed training set and balanced test set for a root seed; the training
/// skew can be overridden for sweeps.
LabeledDataset make_train_set(const ExperimentConfig& config, std::uint64_t root,
                              std::optional<double> skew = std::nullopt);
LabeledDataset make_test_set(const ExperimentConfig& config, std::uint64_t root);

struct RunOutput {
  TrainResult result;
  Evaluation evaluation;
  RunRecord record;
};

RunOutput run_teacher(const ExperimentConfig& config, std::uint64_t root,
                      const LabeledDataset& train_set, const LabeledDataset& test_set);
RunOutput run_student(const ExperimentConfig& config, const MethodSpec& method, std::uint64_t root,
                      const LabeledDataset& train_set, const LabeledDataset& test_set,
                      const ModelCheckpoint* teacher);

/// Writes <stem>.ckpt, <stem>_history.csv and <stem>_metrics.json into dir.
void write_run(const std::filesystem::path& dir, const std::string& stem, const RunOutput& run,
               std::uint64_t root, double lambda);
std::string metrics_json(const RunOutput& run, std::uint64_t root, double lambda);
std::string run_stem(const std::string& tag, double lambda, std::uint64_t root);

/// Appends a timestamped line to <dir>/run.log. Timestamps live only there.
void log_event(const std::filesystem::path& dir, const std::string& message);

// ---- commands ---------------------------------------------------------------
// Each writes into config.output_dir and returns text for the console.

std::string cmd_gen_data(const ExperimentConfig& config);
std::string cmd_train_teacher(const ExperimentConfig& config);
/// Throws UsageError when the method needs a teacher and the path is empty.
std::string cmd_distill(const ExperimentConfig& config, const std::filesystem::path& teacher_path);
std::string cmd_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint_path);

struct SweepRow {
  double skew = 0.0;
  std::string model;  // "teacher" or "student"
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double deo_a = 0.0;
  double deo_m = 0.0;
};

/// For every skew and seed: teacher on skew-rho data, student (config.distill)
/// on data at the configured training skew, both scored on the balanced test
/// set. Throws UsageError on a skew outside [0.5, 1].
std::vector<SweepRow> sweep_skew(const ExperimentConfig& config, const std::vector<double>& skews);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string cmd_sweep_skew(const ExperimentConfig& config, const std::vector<double>& skews);

/// Teacher plus every method in the matrix over config.runs seeds; writes
/// per-run artifacts, runs.csv and the comparison table.
ComparisonTable run_method_matrix(const ExperimentConfig& config, std::vector<RunRecord>* runs = nullptr);
std::string cmd_run(const ExperimentConfig& config);

/// Returns the report; sets `passed`.
std::string cmd_verify(const std::filesystem::path& out_dir, int trials, std::uint64_t seed, bool& passed);

std::string cmd_report(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir);

}  // namespace mfd
