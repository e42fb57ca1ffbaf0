#include "mfd/objectives.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "mfd/errors.hpp"

namespace mfd {
namespace {

Graph& graph_of(const MlpVars& vars) {
  if (vars.weights.empty()) throw ContractError("objective: network is not bound to a graph");
  return *vars.weights.front().graph();
}

struct Forwarded {
  MlpNodes student;
  Var input;
};

Forwarded forward_student(const Batch& batch, const MlpVars& student) {
  Graph& g = graph_of(student);
  Var x = g.constant(batch.features);
  return {mlp_forward(student, x), x};
}

// Teacher outputs on the batch, detached.
MlpNodes forward_teacher(Graph& g, Var input, const MlpVars& teacher) {
  if (teacher.weights.empty() || teacher.weights.front().graph() != &g) {
    throw ContractError("objective: teacher and student must share a graph");
  }
  MlpNodes t = mlp_forward(teacher, input);
  return {g.detach(t.features), g.detach(t.logits)};
}

Var with_regularizer(Var ce, Var reg, double lambda) { return add(ce, scale(reg, 0.5 * lambda)); }

void require_labels(const Batch& batch) {
  if (batch.labels.size() != batch.groups.size() || batch.features.rank() != 2 ||
      batch.features.rows() != batch.labels.size()) {
    throw ShapeError("objective: batch features, labels and groups differ in length");
  }
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kCe: return "CE";
    case Method::kMfd: return "MFD";
    case Method::kMfdK: return "MFD-K";
    case Method::kMfdF: return "MFD-F";
    case Method::kHkd: return "HKD";
    case Method::kFitNet: return "FITNET";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string s;
  for (char c : name) s += c == '_' ? '-' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "CE" || s == "SS" || s == "TEACHER") return Method::kCe;
  if (s == "MFD") return Method::kMfd;
  if (s == "MFD-K" || s == "MFDK") return Method::kMfdK;
  if (s == "MFD-F" || s == "MFDF") return Method::kMfdF;
  if (s == "HKD") return Method::kHkd;
  if (s == "FITNET") return Method::kFitNet;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

bool method_needs_teacher(Method m) {
  return m == Method::kMfd || m == Method::kMfdK || m == Method::kHkd || m == Method::kFitNet;
}

void ObjectiveConfig::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("objective: lambda must be non-negative");
  if (!(temperature >= 1.0)) throw ConfigError("objective: temperature must be >= 1");
  if (!(kd_weight >= 0.0 && kd_weight <= 1.0)) throw ConfigError("objective: kd_weight must lie in [0, 1]");
  mmd.validate();
}

std::map<GroupClass, std::vector<std::size_t>> partition_cells(const Batch& batch) {
  std::map<GroupClass, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    cells[GroupClass{batch.groups[i], batch.labels[i]}].push_back(i);
  }
  return cells;
}

std::map<int, std::vector<std::size_t>> partition_classes(const Batch& batch) {
  std::map<int, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < batch.size(); ++i) classes[batch.labels[i]].push_back(i);
  return classes;
}

Var objective_ce(Var student_logits, std::span<const int> labels) {
  return softmax_cross_entropy(student_logits, labels);
}

Var objective_mfd(const Batch& batch, const MlpVars& teacher, const MlpVars& student,
                  const ObjectiveConfig& config) {
  require_labels(batch);
  auto [s, x] = forward_student(batch, student);
  Graph& g = graph_of(student);
  const MlpNodes t = forward_teacher(g, x, teacher);
  if (t.features.value().cols() != s.features.value().cols()) {
    throw ConfigError("objective_mfd: teacher and student feature widths differ");
  }
  ClassPools pools;
  for (const auto& [label, rows] : partition_classes(batch)) {
    pools[label] = gather_rows(t.features.value(), rows);
  }
  std::map<GroupClass, Var> cells;
  for (const auto& [cell, rows] : partition_cells(batch)) {
    cells[cell] = gather_rows(s.features, rows);
  }
  Var reg = mfd_regularizer(g, pools, cells, config.mmd);
  return with_regularizer(objective_ce(s.logits, batch.labels), reg, config.lambda);
}

Var objective_mfd_k(const Batch& batch, const MlpVars& teacher, const MlpVars& student,
                    const ObjectiveConfig& config) {
  require_labels(batch);
  auto [s, x] = forward_student(batch, student);
  Graph& g = graph_of(student);
  const MlpNodes t = forward_teacher(g, x, teacher);
  const double sigma2 = resolve_bandwidth(config.mmd, t.features.value(), s.features.value());
  Var reg = mmd2_biased(t.features, s.features, sigma2);
  return with_regularizer(objective_ce(s.logits, batch.labels), reg, config.lambda);
}

Var objective_mfd_f(const Batch& batch, const MlpVars& student, const ObjectiveConfig& config) {
  require_labels(batch);
  config.mmd.validate();
  auto [s, x] = forward_student(batch, student);
  Graph& g = graph_of(student);
  const auto classes = partition_classes(batch);
  Var reg = g.constant(Tensor::scalar(0.0));
  for (const auto& [cell, rows] : partition_cells(batch)) {
    // class pool enters as a constant: only the (a, y) side carries gradient
    const Tensor pooled = gather_rows(s.features.value(), classes.at(cell.label));
    Var group = gather_rows(s.features, rows);
    const double sigma2 = resolve_bandwidth(config.mmd, pooled, group.value());
    reg = add(reg, mmd2_biased(g.constant(pooled), group, sigma2));
  }
  return with_regularizer(objective_ce(s.logits, batch.labels), reg, config.lambda);
}

Var objective_hkd(const Batch& batch, const MlpVars& teacher, const MlpVars& student,
                  const ObjectiveConfig& config) {
  require_labels(batch);
  auto [s, x] = forward_student(batch, student);
  Graph& g = graph_of(student);
  const MlpNodes t = forward_teacher(g, x, teacher);
  const double temp = config.temperature;
  Var ce = objective_ce(s.logits, batch.labels);
  Var kl = softened_kl(s.logits, t.logits.value(), temp);
  return add(scale(ce, 1.0 - config.kd_weight), scale(kl, config.kd_weight * temp * temp));
}

Var objective_fitnet(const Batch& batch, const MlpVars& teacher, const MlpVars& student,
                     const ObjectiveConfig& config) {
  require_labels(batch);
  auto [s, x] = forward_student(batch, student);
  Graph& g = graph_of(student);
  const MlpNodes t = forward_teacher(g, x, teacher);
  if (t.features.value().cols() != s.features.value().cols()) {
    throw ConfigError("objective_fitnet: teacher and student feature widths differ");
  }
  const double temp = config.temperature;
  Var ce = objective_ce(s.logits, batch.labels);
  Var kl = softened_kl(s.logits, t.logits.value(), temp);
  Var hkd = add(scale(ce, 1.0 - config.kd_weight), scale(kl, config.kd_weight * temp * temp));
  Var feat = scale(sum_squares(sub(t.features, s.features)),
                   1.0 / static_cast<double>(batch.size()));
  return add(hkd, feat);
}

Var build_objective(const Batch& batch, const MlpVars* teacher, const MlpVars& student,
                    const ObjectiveConfig& config) {
  config.validate();
  if (method_needs_teacher(config.method) && teacher == nullptr) {
    throw ConfigError(std::string("method ") + std::string(method_name(config.method)) +
                      " requires a teacher");
  }
  switch (config.method) {
    case Method::kCe: {
      require_labels(batch);
      auto [s, x] = forward_student(batch, student);
      return objective_ce(s.logits, batch.labels);
    }
    case Method::kMfd: return objective_mfd(batch, *teacher, student, config);
    case Method::kMfdK: return objective_mfd_k(batch, *teacher, student, config);
    case Method::kMfdF: return objective_mfd_f(batch, student, config);
    case Method::kHkd: return objective_hkd(batch, *teacher, student, config);
    case Method::kFitNet: return objective_fitnet(batch, *teacher, student, config);
  }
  throw ConfigError("unhandled method");
}

}  // namespace mfd
