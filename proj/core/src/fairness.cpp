#include "mfd/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "mfd/errors.hpp"

namespace mfd {

AccuracyTable::AccuracyTable(std::size_t num_groups, std::size_t num_classes)
    : groups_(num_groups),
      classes_(num_classes),
      support_(num_groups * num_classes, 0),
      correct_(num_groups * num_classes, 0),
      override_(num_groups * num_classes) {}

std::size_t AccuracyTable::index(std::size_t group, std::size_t label) const {
  if (group >= groups_ || label >= classes_) {
    throw DomainError("AccuracyTable: cell (" + std::to_string(group) + ", " +
                      std::to_string(label) + ") out of range");
  }
  return group * classes_ + label;
}

std::optional<double> AccuracyTable::accuracy(std::size_t group, std::size_t label) const {
  const std::size_t i = index(group, label);
  if (override_[i]) return override_[i];
  if (support_[i] == 0) return std::nullopt;
  return static_cast<double>(correct_[i]) / static_cast<double>(support_[i]);
}

std::size_t AccuracyTable::support(std::size_t group, std::size_t label) const {
  return support_[index(group, label)];
}

std::size_t AccuracyTable::correct(std::size_t group, std::size_t label) const {
  return correct_[index(group, label)];
}

void AccuracyTable::record(std::size_t group, std::size_t label, bool hit) {
  const std::size_t i = index(group, label);
  ++support_[i];
  if (hit) ++correct_[i];
}

AccuracyTable AccuracyTable::from_accuracies(
    const std::vector<std::vector<std::optional<double>>>& acc) {
  const std::size_t groups = acc.size();
  const std::size_t classes = groups == 0 ? 0 : acc.front().size();
  AccuracyTable t(groups, classes);
  for (std::size_t a = 0; a < groups; ++a) {
    if (acc[a].size() != classes) throw DomainError("from_accuracies: ragged accuracy matrix");
    for (std::size_t y = 0; y < classes; ++y) {
      if (!acc[a][y]) continue;
      const double v = *acc[a][y];
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("from_accuracies: accuracy outside [0, 1]");
      const std::size_t i = t.index(a, y);
      t.support_[i] = 1;
      t.override_[i] = v;
    }
  }
  return t;
}

AccuracyTable group_class_accuracy(std::span<const int> preds, std::span<const int> labels,
                                   std::span<const int> groups, std::size_t num_classes,
                                   std::size_t num_groups) {
  if (preds.size() != labels.size() || preds.size() != groups.size()) {
    throw DomainError("group_class_accuracy: prediction, label and group lengths differ");
  }
  AccuracyTable table(num_groups, num_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || static_cast<std::size_t>(preds[i]) >= num_classes || labels[i] < 0 ||
        static_cast<std::size_t>(labels[i]) >= num_classes || groups[i] < 0 ||
        static_cast<std::size_t>(groups[i]) >= num_groups) {
      throw DomainError("group_class_accuracy: index out of range at sample " + std::to_string(i));
    }
    table.record(static_cast<std::size_t>(groups[i]), static_cast<std::size_t>(labels[i]),
                 preds[i] == labels[i]);
  }
  return table;
}

DeoReport deo_metrics(const AccuracyTable& table) {
  const std::size_t groups = table.num_groups(), classes = table.num_classes();
  bool any_present = false;
  std::vector<double> gaps(classes, 0.0);
  std::size_t hits = 0, total = 0;
  for (std::size_t y = 0; y < classes; ++y) {
    double lo = 0.0, hi = 0.0;
    std::size_t present = 0;
    for (std::size_t a = 0; a < groups; ++a) {
      total += table.support(a, y);
      hits += table.correct(a, y);
      const auto acc = table.accuracy(a, y);
      if (!acc) continue;
      any_present = true;
      if (present == 0) {
        lo = hi = *acc;
      } else {
        lo = std::min(lo, *acc);
        hi = std::max(hi, *acc);
      }
      ++present;
    }
    // max over pairs of |acc_a - acc_a'| is the spread of the present values
    gaps[y] = present >= 2 ? hi - lo : 0.0;
  }
  if (!any_present) throw DomainError("deo_metrics: every (group, class) cell is absent");

  DeoReport report{table, gaps, 0.0, 0.0, 0.0};
  double gap_sum = 0.0;
  for (double g : gaps) {
    report.deo_m = std::max(report.deo_m, g);
    gap_sum += g;
  }
  report.deo_a = classes == 0 ? 0.0 : gap_sum / static_cast<double>(classes);
  report.overall_accuracy =
      total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
  return report;
}

std::string DeoReport::to_json() const {
  nlohmann::ordered_json j;
  j["overall_acc"] = overall_accuracy;
  j["deo_a"] = deo_a;
  j["deo_m"] = deo_m;
  j["num_groups"] = table.num_groups();
  j["num_classes"] = table.num_classes();
  for (std::size_t a = 0; a < table.num_groups(); ++a) {
    for (std::size_t y = 0; y < table.num_classes(); ++y) {
      const std::string cell = std::to_string(a) + "_" + std::to_string(y);
      const auto acc = table.accuracy(a, y);
      if (acc) {
        j["acc_" + cell] = *acc;
      } else {
        j["acc_" + cell] = nullptr;
      }
      j["support_" + cell] = table.support(a, y);
    }
  }
  for (std::size_t y = 0; y < class_gaps.size(); ++y) {
    j["gap_" + std::to_string(y)] = class_gaps[y];
  }
  return j.dump(2);
}

}  // namespace mfd
