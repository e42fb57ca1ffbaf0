#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfd/errors.hpp"
#include "mfd/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<double> lambda;
  std::optional<std::string> out;
  std::optional<int> runs;
};

void add_common(CLI::App* cmd, Common& c, bool method_flags) {
  cmd->add_option("--config", c.config, "Experiment config (JSON)");
  cmd->add_option("--seed", c.seed, "Root seed");
  cmd->add_option("--out", c.out, "Output directory");
  if (method_flags) {
    cmd->add_option("--method", c.method, "CE, SS, MFD, MFD-K, MFD-F, HKD or FITNET");
    cmd->add_option("--lambda", c.lambda, "Regularizer weight");
  }
}

mfd::ExperimentConfig resolve(const Common& c) {
  mfd::ExperimentConfig config;
  if (!c.config.empty()) config = mfd::load_experiment_config(c.config);
  mfd::Overrides o;
  o.seed = c.seed;
  o.method = c.method;
  o.lambda = c.lambda;
  if (c.out) o.out = std::filesystem::path(*c.out);
  o.runs = c.runs;
  mfd::apply_overrides(config, o);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware feature distillation experiments"};
  app.require_subcommand(1);

  Common gen, teacher, distill, eval, sweep, run;
  std::string teacher_path, checkpoint_path;
  std::vector<double> skews{0.5, 0.6, 0.7, 0.8, 0.9, 0.95};

  auto* gen_cmd = app.add_subcommand("gen-data", "Write the skewed train set and balanced test set");
  add_common(gen_cmd, gen, false);

  auto* teacher_cmd = app.add_subcommand("train-teacher", "Train the cross-entropy teacher");
  add_common(teacher_cmd, teacher, false);

  auto* distill_cmd = app.add_subcommand("distill", "Train a student against a teacher checkpoint");
  add_common(distill_cmd, distill, true);
  distill_cmd->add_option("--teacher", teacher_path, "Teacher checkpoint");

  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on the balanced test set");
  add_common(eval_cmd, eval, false);
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint to evaluate")->required();

  auto* sweep_cmd = app.add_subcommand("sweep-skew", "Teacher skew sweep with students at the training skew");
  add_common(sweep_cmd, sweep, true);
  sweep_cmd->add_option("--skews", skews, "Teacher training skews")->delimiter(',');
  sweep_cmd->add_option("--runs", sweep.runs, "Seeds per skew");

  auto* run_cmd = app.add_subcommand("run", "Teacher plus the configured method matrix over seeds");
  add_common(run_cmd, run, false);
  run_cmd->add_option("--runs", run.runs, "Number of seeds");

  std::string verify_out;
  int trials = 1000;
  std::uint64_t verify_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "Lemma trials and gradient checks");
  verify_cmd->add_option("--out", verify_out, "Directory for verification.json");
  verify_cmd->add_option("--trials", trials, "Randomized trials per lemma");
  verify_cmd->add_option("--seed", verify_seed, "Seed");

  std::vector<std::string> inputs;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Comparison table from result files");
  report_cmd->add_option("files", inputs, "Metrics JSON or CSV files")->required();
  report_cmd->add_option("--out", report_out, "Directory for report.txt and report.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      std::cout << mfd::cmd_gen_data(resolve(gen));
    } else if (*teacher_cmd) {
      std::cout << mfd::cmd_train_teacher(resolve(teacher));
    } else if (*distill_cmd) {
      std::cout << mfd::cmd_distill(resolve(distill), teacher_path);
    } else if (*eval_cmd) {
      std::cout << mfd::cmd_eval(resolve(eval), checkpoint_path);
    } else if (*sweep_cmd) {
      std::cout << mfd::cmd_sweep_skew(resolve(sweep), skews);
    } else if (*run_cmd) {
      std::cout << mfd::cmd_run(resolve(run));
    } else if (*verify_cmd) {
      bool passed = false;
      std::cout << mfd::cmd_verify(verify_out, trials, verify_seed, passed);
      return passed ? 0 : 1;
    } else if (*report_cmd) {
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      std::cout << mfd::cmd_report(paths, report_out);
    }
  } catch (const mfd::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const mfd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mfd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
