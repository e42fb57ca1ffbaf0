#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfd {

/// Per-(group, class) conditional accuracy Pr(pred = y | A = a, Y = y).
/// Cells with no samples are absent rather than zero.
class AccuracyTable {
 public:
  AccuracyTable() : AccuracyTable(0, 0) {}
  AccuracyTable(std::size_t num_groups, std::size_t num_classes);

  std::size_t num_groups() const { return groups_; }
  std::size_t num_classes() const { return classes_; }

  std::optional<double> accuracy(std::size_t group, std::size_t label) const;
  std::size_t support(std::size_t group, std::size_t label) const;
  std::size_t correct(std::size_t group, std::size_t label) const;
  bool present(std::size_t group, std::size_t label) const { return support(group, label) > 0; }

  void record(std::size_t group, std::size_t label, bool hit);
  /// Builds a table from explicit accuracies; nullopt marks an absent cell.
  /// Present cells get unit support with `correct` left at 0, so this form is
  /// only meant for metric computation, not for overall accuracy.
  static AccuracyTable from_accuracies(const std::vector<std::vector<std::optional<double>>>& acc);

 private:
  std::size_t index(std::size_t group, std::size_t label) const;

  std::size_t groups_ = 0;
  std::size_t classes_ = 0;
  std::vector<std::size_t> support_;
  std::vector<std::size_t> correct_;
  std::vector<std::optional<double>> override_;
};

struct DeoReport {
  AccuracyTable table;
  /// Largest between-group accuracy gap of each class (0 when fewer than
  /// two groups are present for that class).
  std::vector<double> class_gaps;
  double deo_a = 0.0;
  double deo_m = 0.0;
  double overall_accuracy = 0.0;

  /// Flat key-value JSON record.
  std::string to_json() const;
};

/// Counts hits per (group, class). Throws DomainError on out-of-range
/// indices or mismatched lengths.
AccuracyTable group_class_accuracy(std::span<const int> preds, std::span<const int> labels,
                                   std::span<const int> groups, std::size_t num_classes,
                                   std::size_t num_groups);

/// DEO_M = max_y gap_y and DEO_A = (1/M) sum_y gap_y, where gap_y is the
/// largest |acc(a, y) - acc(a', y)| over present groups. Throws DomainError
/// when every cell is absent.
DeoReport deo_metrics(const AccuracyTable& table);

}  // namespace mfd
