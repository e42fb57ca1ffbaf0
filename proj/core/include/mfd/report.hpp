#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfd/trainer.hpp"

namespace mfd {

/// One model's metrics from one seed, in percent.
struct RunRecord {
  std::string method;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double deo_a = 0.0;
  double deo_m = 0.0;
};

/// 100 * (value - teacher) / teacher. Throws DomainError if teacher == 0.
double relative_change(double value, double teacher);

struct ResultRow {
  std::string method;
  int seed_count = 0;
  MetricSummary accuracy;
  MetricSummary deo_a;
  MetricSummary deo_m;
  // relative change against the teacher row, percent
  double rel_accuracy = 0.0;
  double rel_deo_a = 0.0;
  double rel_deo_m = 0.0;
};

struct ComparisonTable {
  std::vector<ResultRow> rows;  // teacher first

  /// Columns Model | Accuracy (up) | DEO_A (down) | DEO_M (down); method
  /// cells read "value (|change| arrow)".
  std::string to_text() const;
  std::string to_csv() const;
};

/// Groups runs by method, keeping first-appearance order.
std::vector<ResultRow> aggregate_runs(const std::vector<RunRecord>& runs);

/// Fills in relative changes against the row tagged `teacher_tag` (matched
/// case-insensitively) and moves it to the front. Throws UsageError if it
/// is missing.
ComparisonTable build_comparison(std::vector<ResultRow> rows, const std::string& teacher_tag = "TEACHER");

/// Reads run records from a metrics JSON file written by the train/distill
/// commands, or from a CSV with header method,seed,accuracy,deo_a,deo_m, or
/// a summary CSV with header method,accuracy,deo_a,deo_m (seed 0).
std::vector<RunRecord> read_run_records(const std::filesystem::path& path);

std::string run_records_csv(const std::vector<RunRecord>& runs);

}  // namespace mfd
