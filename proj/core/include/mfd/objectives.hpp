#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfd/graph.hpp"
#include "mfd/kernel_mmd.hpp"
#include "mfd/mlp.hpp"

namespace mfd {

enum class Method {
  kCe,      // plain cross entropy (teacher training; SS with the stratified sampler)
  kMfd,     // CE + (lambda/2) * sum_y sum_a MMD^2(teacher_y, student_{a,y})
  kMfdK,    // CE + (lambda/2) * MMD^2(teacher, student), pooled over the batch
  kMfdF,    // CE + (lambda/2) * sum_y sum_a MMD^2(sg(student_y), student_{a,y})
  kHkd,     // (1 - alpha) CE + alpha T^2 KL(teacher_T || student_T)
  kFitNet,  // HKD + mean squared L2 between penultimate features
};

std::string_view method_name(Method m);
/// Accepts "CE", "SS", "MFD", "MFD-K", "MFD-F", "HKD", "FITNET" (any case,
/// '_' or '-'). "SS" maps to kCe. Throws ConfigError otherwise.
Method parse_method(std::string_view name);
bool method_needs_teacher(Method m);

struct ObjectiveConfig {
  Method method = Method::kCe;
  double lambda = 0.0;
  double temperature = 1.0;
  double kd_weight = 0.5;
  MmdConfig mmd;

  void validate() const;
};

/// Mini-batch view: features plus per-row class and group.
struct Batch {
  Tensor features;
  std::vector<int> labels;
  std::vector<int> groups;

  std::size_t size() const { return labels.size(); }
};

/// Row indices of each (group, class) cell present in the batch.
std::map<GroupClass, std::vector<std::size_t>> partition_cells(const Batch& batch);
/// Row indices of each class present in the batch.
std::map<int, std::vector<std::size_t>> partition_classes(const Batch& batch);

Var objective_ce(Var student_logits, std::span<const int> labels);

/// Each of the distillation objectives runs the teacher inside `graph` and
/// detaches its outputs, so no gradient ever reaches teacher parameters even
/// if they were bound as trainable. Cells empty in the batch are skipped.
Var objective_mfd(const Batch& batch, const MlpVars& teacher, const MlpVars& student,
                  const ObjectiveConfig& config);
Var objective_mfd_k(const Batch& batch, const MlpVars& teacher, const MlpVars& student,
                    const ObjectiveConfig& config);
Var objective_mfd_f(const Batch& batch, const MlpVars& student, const ObjectiveConfig& config);
Var objective_hkd(const Batch& batch, const MlpVars& teacher, const MlpVars& student,
                  const ObjectiveConfig& config);
Var objective_fitnet(const Batch& batch, const MlpVars& teacher, const MlpVars& student,
                     const ObjectiveConfig& config);

/// Dispatches on config.method. Throws ConfigError when the method needs a
/// teacher and none is given.
Var build_objective(const Batch& batch, const MlpVars* teacher, const MlpVars& student,
                    const ObjectiveConfig& config);

}  // namespace mfd
