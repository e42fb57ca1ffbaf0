#include "mfd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "mfd/errors.hpp"
#include "mfd/finite_diff.hpp"
#include "mfd/mlp.hpp"
#include "mfd/objectives.hpp"

namespace mfd {
namespace {

// Mean of k over all row pairs of x and y: <mu_x, mu_y> in the RKHS.
double mean_kernel(const Tensor& x, const Tensor& y, double sigma2, const KernelFn& kernel) {
  if (x.rank() != 2 || y.rank() != 2 || x.rows() == 0 || y.rows() == 0) {
    throw DomainError("lemma check: empty feature sample");
  }
  const Tensor d = pairwise_sqdist(x, y);
  double s = 0.0;
  for (double v : d.values()) s += kernel(v, sigma2);
  return s / static_cast<double>(d.values().size());
}

std::vector<std::vector<double>> embedding_gram(const std::vector<const Tensor*>& atoms,
                                                double sigma2, const KernelFn& kernel) {
  const std::size_t n = atoms.size();
  std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      g[i][j] = g[j][i] = mean_kernel(*atoms[i], *atoms[j], sigma2, kernel);
    }
  }
  return g;
}

double quad_form(const std::vector<std::vector<double>>& g, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[i] * w[j] * g[i][j];
  }
  return s;
}

LemmaCheckResult finish(double lhs, double rhs, double tol) {
  LemmaCheckResult r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = lhs - rhs;
  r.tol = tol;
  r.holds = r.slack >= -tol;
  r.equality = std::abs(r.slack) <= tol;
  return r;
}

LemmaCheckResult not_applicable(double tol) {
  LemmaCheckResult r;
  r.tol = tol;
  r.applicable = false;
  r.holds = false;
  return r;
}

Tensor random_points(Rng& rng, std::size_t n, std::size_t d, const std::vector<double>& shift,
                     double spread) {
  Tensor t(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) t(i, j) = shift[j] + spread * rng.normal();
  }
  return t;
}

std::vector<double> random_vector(Rng& rng, std::size_t d, double scale) {
  std::vector<double> v(d);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

void accumulate(TrialStats& s, const LemmaCheckResult& r, bool require_equality) {
  ++s.trials;
  if (!r.applicable) {
    ++s.not_applicable;
    return;
  }
  const bool ok = require_equality ? r.equality : r.holds;
  if (!ok) ++s.violations;
  if (s.trials == 1 || r.slack < s.min_slack) s.min_slack = r.slack;
  s.mean_slack += r.slack;
  s.max_abs_slack = std::max(s.max_abs_slack, std::abs(r.slack));
}

void finalize(TrialStats& s) {
  const int counted = s.trials - s.not_applicable;
  if (counted > 0) s.mean_slack /= counted;
}

// ---- gradient battery ------------------------------------------------------

struct Check {
  GradCheckStats stats;
  double tol;

  void record(std::span<const double> analytic, std::span<const double> numeric) {
    const double err = relative_error(analytic, numeric);
    ++stats.instances;
    if (!(err < tol)) ++stats.failures;
    stats.max_rel_err = std::max(stats.max_rel_err, std::isfinite(err) ? err : 1e300);
  }
};

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Tensor t(r, c);
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

std::vector<double> concat_values(std::initializer_list<const Tensor*> ts) {
  std::vector<double> out;
  for (const Tensor* t : ts) out.insert(out.end(), t->values().begin(), t->values().end());
  return out;
}

// Splits a flat vector back into tensors shaped like `shapes`.
std::vector<Tensor> split_like(std::span<const double> flat, const std::vector<Tensor>& shapes) {
  std::vector<Tensor> out;
  std::size_t off = 0;
  for (const auto& s : shapes) {
    Tensor t = Tensor::zeros_like(s);
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), t.values().size(), t.values().begin());
    off += t.values().size();
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<double> grads_of(const std::vector<Var>& vars) {
  std::vector<double> out;
  for (const Var& v : vars) {
    const Tensor& g = v.grad();
    out.insert(out.end(), g.values().begin(), g.values().end());
  }
  return out;
}

// Two-input op check: scalar = sum(op(x, y) * c) for a random constant c.
template <typename VarOp, typename ValueOp>
void check_binary_op(Check& check, Rng& rng, double eps, VarOp var_op, ValueOp value_op) {
  const std::size_t n = 2 + rng.below(5), m = 2 + rng.below(5), d = 1 + rng.below(5);
  const Tensor x = random_tensor(rng, n, d);
  const Tensor y = random_tensor(rng, m, d);
  const Tensor c = random_tensor(rng, m, 1);
  Graph g;
  Var xv = g.parameter(x), yv = g.parameter(y);
  Var out = sum(matmul(var_op(xv, yv), g.constant(c)));
  g.backward(out);
  const auto analytic = grads_of({xv, yv});
  const std::vector<Tensor> shapes{x, y};
  auto f = [&](std::span<const double> p) {
    const auto t = split_like(p, shapes);
    return sum(matmul(value_op(t[0], t[1]), c));
  };
  const auto params = concat_values({&x, &y});
  check.record(analytic, finite_diff_grad(f, params, eps));
}

struct NetInstance {
  MlpSpec spec;
  MlpParams student;
  MlpParams teacher;
  Batch batch;
};

// Smallest |pre-activation| of any hidden unit on the batch.
double min_hidden_margin(const MlpParams& p, const Tensor& x) {
  double margin = std::numeric_limits<double>::infinity();
  Tensor h = x;
  for (std::size_t l = 0; l + 1 < p.layers.size(); ++l) {
    Tensor z = add_row(matmul(h, p.layers[l].weight), p.layers[l].bias);
    for (double v : z.values()) margin = std::min(margin, std::abs(v));
    h = relu(z);
  }
  return margin;
}

void jitter(MlpParams& p, Rng& rng, double scale) {
  auto flat = p.flatten();
  for (double& v : flat) v += scale * rng.normal();
  p.assign(flat);
}

// Small network and batch covering every (group, class) cell: two rows per
// cell plus one extra in each group-0 cell. Unequal group sizes within a
// class keep the pooled side of MFD-F from sitting at its stationary point,
// where the stop-gradient would make no difference.
// Inputs are redrawn until no hidden unit sits within 1e-3 of its ReLU kink,
// so central differences never straddle a kink.
NetInstance random_net_instance(Rng& rng) {
  NetInstance inst;
  inst.spec = MlpSpec{{4, 6, 5, 3}};
  inst.student = init_params(inst.spec, rng.next_u64());
  inst.teacher = init_params(inst.spec, rng.next_u64());
  jitter(inst.student, rng, 0.1);
  jitter(inst.teacher, rng, 0.1);
  const int classes = 3;
  const std::size_t n = 15;
  for (int attempt = 0;; ++attempt) {
    Batch b;
    b.features = random_tensor(rng, n, 4);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t cell = i < 12 ? i % 6 : i - 12;
      b.groups.push_back(static_cast<int>(cell) / classes);
      b.labels.push_back(static_cast<int>(cell) % classes);
    }
    if (min_hidden_margin(inst.student, b.features) >= 1e-3 &&
        min_hidden_margin(inst.teacher, b.features) >= 1e-3) {
      inst.batch = std::move(b);
      return inst;
    }
    if (attempt > 1000) throw NumericError("grad_battery: could not draw a kink-free batch");
  }
}

std::vector<double> objective_gradient(const NetInstance& inst, const ObjectiveConfig& cfg) {
  Graph g;
  const MlpVars s = bind_parameters(g, inst.student, true);
  const MlpVars t = bind_parameters(g, inst.teacher, false);
  Var loss = build_objective(inst.batch, &t, s, cfg);
  g.backward(loss);
  std::vector<double> out;
  for (const auto& gr : collect_gradients(s)) out.insert(out.end(), gr.values().begin(), gr.values().end());
  return out;
}

double objective_value(const NetInstance& inst, std::span<const double> theta,
                       const ObjectiveConfig& cfg) {
  MlpParams p = inst.student;
  p.assign(theta);
  Graph g;
  const MlpVars s = bind_parameters(g, p, false);
  const MlpVars t = bind_parameters(g, inst.teacher, false);
  return build_objective(inst.batch, &t, s, cfg).value().item();
}

double ce_value(const Tensor& logits, std::span<const int> labels) {
  Graph g;
  return softmax_cross_entropy(g.constant(logits), labels).value().item();
}

// MFD-F objective with the class-pooled side either frozen at `frozen`
// features or recomputed from the current parameters.
double mfd_f_value(const NetInstance& inst, std::span<const double> theta, const ObjectiveConfig& cfg,
                   const Tensor* frozen) {
  MlpParams p = inst.student;
  p.assign(theta);
  const MlpOutput out = mlp_forward(p, inst.batch.features);
  const Tensor& pool_source = frozen ? *frozen : out.features;
  const auto classes = partition_classes(inst.batch);
  double reg = 0.0;
  for (const auto& [cell, rows] : partition_cells(inst.batch)) {
    const Tensor pooled = gather_rows(pool_source, classes.at(cell.label));
    const Tensor group = gather_rows(out.features, rows);
    reg += mmd2_biased(pooled, group, resolve_bandwidth(cfg.mmd, pooled, group));
  }
  return ce_value(out.logits, inst.batch.labels) + 0.5 * cfg.lambda * reg;
}

struct RegInstance {
  ClassPools teacher;
  GroupedFeatures student;
  std::vector<GroupClass> keys;
};

RegInstance random_reg_instance(Rng& rng) {
  RegInstance r;
  const int groups = 2, classes = 2;
  const std::size_t d = 1 + rng.below(5);
  for (int y = 0; y < classes; ++y) r.teacher[y] = random_tensor(rng, 3 + rng.below(4), d);
  for (int a = 0; a < groups; ++a) {
    for (int y = 0; y < classes; ++y) {
      r.keys.push_back(GroupClass{a, y});
      r.student[GroupClass{a, y}] = random_tensor(rng, 2 + rng.below(4), d, 1.2);
    }
  }
  return r;
}

}  // namespace

double rbf_from_sqdist(double sqdist, double sigma2) { return std::exp(-sqdist / (2.0 * sigma2)); }

double negated_exponent_kernel(double sqdist, double sigma2) {
  return std::exp(sqdist / (2.0 * sigma2));
}

LemmaCheckResult check_lemma1(const GroupedFeatures& teacher, const GroupedFeatures& student,
                              const std::map<GroupClass, double>& weights, const MmdConfig& mmd,
                              const LemmaOptions& options) {
  if (weights.empty()) throw ParameterError("check_lemma1: no cells");
  double total = 0.0;
  for (const auto& [cell, w] : weights) {
    if (!(w >= 0.0)) throw ParameterError("check_lemma1: negative weight");
    if (!teacher.contains(cell) || !student.contains(cell)) {
      throw ParameterError("check_lemma1: weighted cell missing from teacher or student");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("check_lemma1: weights must sum to 1");
  if (teacher.size() != weights.size() || student.size() != weights.size()) {
    throw ParameterError("check_lemma1: teacher, student and weights must share cells");
  }
  mmd.validate();
  if (mmd.bandwidth_mode != BandwidthMode::kFixedGlobal) return not_applicable(options.tol);

  std::vector<GroupClass> cells;
  std::vector<const Tensor*> atoms;
  for (const auto& [cell, w] : weights) {
    cells.push_back(cell);
    atoms.push_back(&teacher.at(cell));
  }
  for (const auto& cell : cells) atoms.push_back(&student.at(cell));
  const std::size_t c = cells.size();
  const auto gram = embedding_gram(atoms, mmd.fixed_sigma2, options.kernel);

  std::map<int, double> class_mass;
  for (const auto& [cell, w] : weights) class_mass[cell.label] += w;

  double lhs = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    const double p = weights.at(cells[i]);
    if (p == 0.0) continue;
    std::vector<double> w(2 * c, 0.0);
    const double py = class_mass.at(cells[i].label);
    for (std::size_t j = 0; j < c; ++j) {
      if (cells[j].label == cells[i].label) w[j] = weights.at(cells[j]) / py;
    }
    w[c + i] -= 1.0;
    lhs += p * quad_form(gram, w);
  }
  std::vector<double> w(2 * c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    w[i] = weights.at(cells[i]);
    w[c + i] = -weights.at(cells[i]);
  }
  return finish(lhs, quad_form(gram, w), options.tol);
}

LemmaCheckResult check_lemma2(const Tensor& teacher_class, const std::vector<Tensor>& student_groups,
                              const MmdConfig& mmd, const LemmaOptions& options) {
  if (student_groups.empty()) throw DomainError("check_lemma2: no student groups");
  mmd.validate();
  std::vector<const Tensor*> atoms{&teacher_class};
  for (const auto& s : student_groups) atoms.push_back(&s);
  // emptiness is checked before the applicability decision
  for (const Tensor* t : atoms) {
    if (t->rank() != 2 || t->rows() == 0) throw DomainError("check_lemma2: empty feature sample");
  }
  if (mmd.bandwidth_mode != BandwidthMode::kFixedGlobal) return not_applicable(options.tol);
  const auto g = embedding_gram(atoms, mmd.fixed_sigma2, options.kernel);
  const std::size_t a = student_groups.size();
  double lhs = 0.0;
  for (std::size_t i = 1; i <= a; ++i) lhs += g[0][0] + g[i][i] - 2.0 * g[0][i];
  double pair_sum = 0.0;
  for (std::size_t i = 1; i <= a; ++i) {
    for (std::size_t j = 1; j <= a; ++j) pair_sum += g[i][i] + g[j][j] - 2.0 * g[i][j];
  }
  return finish(lhs, pair_sum / (2.0 * static_cast<double>(a)), options.tol);
}

Lemma1Instance random_lemma1_instance(Rng& rng, bool uniform_weights) {
  Lemma1Instance inst;
  const int groups = 2 + static_cast<int>(rng.below(3));
  const int classes = 2 + static_cast<int>(rng.below(4));
  const std::size_t d = 1 + rng.below(8);
  inst.sigma2 = rng.uniform(0.25, 4.0);
  double total = 0.0;
  for (int y = 0; y < classes; ++y) {
    const auto class_shift = random_vector(rng, d, 1.0);
    for (int a = 0; a < groups; ++a) {
      const GroupClass cell{a, y};
      auto shift = class_shift;
      for (auto& v : shift) v += 0.5 * rng.normal();
      inst.teacher[cell] = random_points(rng, 3 + rng.below(8), d, shift, 1.0);
      for (auto& v : shift) v += 0.5 * rng.normal();
      inst.student[cell] = random_points(rng, 3 + rng.below(8), d, shift, rng.uniform(0.5, 1.5));
      const double w = uniform_weights ? 1.0 : 0.05 + rng.uniform01();
      inst.weights[cell] = w;
      total += w;
    }
  }
  for (auto& [cell, w] : inst.weights) w /= total;
  return inst;
}

Lemma2Instance random_lemma2_instance(Rng& rng, bool equal_concat) {
  Lemma2Instance inst;
  const std::size_t groups = 2 + rng.below(3);
  const std::size_t d = 1 + rng.below(8);
  inst.sigma2 = rng.uniform(0.25, 4.0);
  const std::size_t common = 3 + rng.below(8);
  for (std::size_t a = 0; a < groups; ++a) {
    const std::size_t n = equal_concat ? common : 3 + rng.below(8);
    inst.groups.push_back(random_points(rng, n, d, random_vector(rng, d, 1.0), 1.0));
  }
  if (equal_concat) {
    inst.teacher = inst.groups.front();
    for (std::size_t a = 1; a < groups; ++a) inst.teacher = concat_rows(inst.teacher, inst.groups[a]);
  } else {
    inst.teacher = random_points(rng, 3 + rng.below(8), d, random_vector(rng, d, 1.0), 1.0);
  }
  return inst;
}

TrialStats run_lemma1_trials(int trials, std::uint64_t seed, const LemmaOptions& options) {
  TrialStats s;
  s.name = "lemma1";
  Rng rng(seed, stream::kVerify);
  for (int t = 0; t < trials; ++t) {
    const auto inst = random_lemma1_instance(rng, t % 2 == 0);
    accumulate(s, check_lemma1(inst.teacher, inst.student, inst.weights, MmdConfig::fixed(inst.sigma2), options),
               false);
  }
  finalize(s);
  return s;
}

TrialStats run_lemma2_trials(int trials, std::uint64_t seed, const LemmaOptions& options) {
  TrialStats s;
  s.name = "lemma2";
  Rng rng(seed, stream::kVerify + 2);
  for (int t = 0; t < trials; ++t) {
    const auto inst = random_lemma2_instance(rng, false);
    accumulate(s, check_lemma2(inst.teacher, inst.groups, MmdConfig::fixed(inst.sigma2), options), false);
  }
  finalize(s);
  return s;
}

TrialStats run_lemma2_equality_trials(int trials, std::uint64_t seed, const LemmaOptions& options) {
  TrialStats s;
  s.name = "lemma2_equality";
  Rng rng(seed, stream::kVerify + 3);
  for (int t = 0; t < trials; ++t) {
    const auto inst = random_lemma2_instance(rng, true);
    accumulate(s, check_lemma2(inst.teacher, inst.groups, MmdConfig::fixed(inst.sigma2), options), true);
  }
  finalize(s);
  return s;
}

bool GradBatteryReport::passed() const {
  if (checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(),
                     [](const GradCheckStats& c) { return c.instances > 0 && c.failures == 0; });
}

GradBatteryReport grad_battery(const GradBatteryConfig& config) {
  if (config.instances < 1) throw ParameterError("grad_battery: need at least one instance");
  Rng rng(config.seed, stream::kVerify + 1);
  const double eps = config.eps;
  auto make = [&](std::string name) { return Check{GradCheckStats{std::move(name), 0, 0, 0.0}, config.tol}; };

  Check sqdist = make("pairwise_sqdist");
  Check kernel = make("rbf_kernel_matrix");
  Check mmd = make("mmd2_biased");
  Check reg_fixed = make("mfd_regularizer_fixed_bandwidth");
  Check reg_pair = make("mfd_regularizer_per_pair_bandwidth");
  Check ce = make("objective_ce_lambda0");
  Check mfd = make("objective_mfd");
  Check mfd_k = make("objective_mfd_k");
  Check mfd_f = make("objective_mfd_f");
  Check mfd_f_sg = make("objective_mfd_f_stop_gradient");
  Check hkd = make("objective_hkd");
  Check fitnet = make("objective_fitnet");

  for (int i = 0; i < config.instances; ++i) {
    check_binary_op(
        sqdist, rng, eps, [](Var a, Var b) { return pairwise_sqdist(a, b); },
        [](const Tensor& a, const Tensor& b) { return pairwise_sqdist(a, b); });
    const double s2 = rng.uniform(0.5, 3.0);
    check_binary_op(
        kernel, rng, eps, [s2](Var a, Var b) { return rbf_kernel_matrix(a, b, s2); },
        [s2](const Tensor& a, const Tensor& b) { return rbf_kernel_matrix(a, b, s2); });

    {
      const std::size_t d = 1 + rng.below(5);
      const Tensor x = random_tensor(rng, 2 + rng.below(6), d);
      const Tensor y = random_tensor(rng, 2 + rng.below(6), d, 1.5);
      Graph g;
      Var xv = g.parameter(x), yv = g.parameter(y);
      g.backward(mmd2_biased(xv, yv, s2));
      const std::vector<Tensor> shapes{x, y};
      auto f = [&](std::span<const double> p) {
        const auto t = split_like(p, shapes);
        return mmd2_biased(t[0], t[1], s2);
      };
      mmd.record(grads_of({xv, yv}), finite_diff_grad(f, concat_values({&x, &y}), eps));
    }

    {
      const RegInstance r = random_reg_instance(rng);
      std::vector<Tensor> shapes;
      for (const auto& k : r.keys) shapes.push_back(r.student.at(k));
      std::vector<double> flat;
      for (const auto& t : shapes) flat.insert(flat.end(), t.values().begin(), t.values().end());
      auto regroup = [&](std::span<const double> p) {
        const auto t = split_like(p, shapes);
        GroupedFeatures out;
        for (std::size_t k = 0; k < r.keys.size(); ++k) out[r.keys[k]] = t[k];
        return out;
      };
      auto analytic = [&](const MmdConfig& cfg) {
        Graph g;
        std::map<GroupClass, Var> cells;
        std::vector<Var> order;
        for (const auto& k : r.keys) {
          cells[k] = g.parameter(r.student.at(k));
          order.push_back(cells[k]);
        }
        g.backward(mfd_regularizer(g, r.teacher, cells, cfg));
        return grads_of(order);
      };
      const MmdConfig fixed = MmdConfig::fixed(s2);
      auto f_fixed = [&](std::span<const double> p) { return mfd_regularizer(r.teacher, regroup(p), fixed); };
      reg_fixed.record(analytic(fixed), finite_diff_grad(f_fixed, flat, eps));

      // per-pair bandwidths are constants of the step: freeze them at the base point
      const MmdConfig per_pair;
      std::map<GroupClass, double> frozen;
      for (const auto& k : r.keys) {
        frozen[k] = resolve_bandwidth(per_pair, r.teacher.at(k.label), r.student.at(k));
      }
      auto f_pair = [&](std::span<const double> p) {
        double total = 0.0;
        for (const auto& [k, t] : regroup(p)) total += mmd2_biased(r.teacher.at(k.label), t, frozen.at(k));
        return total;
      };
      reg_pair.record(analytic(per_pair), finite_diff_grad(f_pair, flat, eps));
    }

    {
      const NetInstance inst = random_net_instance(rng);
      const auto theta = inst.student.flatten();
      auto run = [&](Check& check, const ObjectiveConfig& cfg) {
        auto f = [&](std::span<const double> p) { return objective_value(inst, p, cfg); };
        check.record(objective_gradient(inst, cfg), finite_diff_grad(f, theta, eps));
      };
      ObjectiveConfig cfg;
      cfg.mmd = MmdConfig::fixed(rng.uniform(0.5, 2.0));
      cfg.method = Method::kMfd;
      cfg.lambda = 0.0;
      run(ce, cfg);
      cfg.lambda = rng.uniform(1.0, 10.0);
      run(mfd, cfg);
      cfg.method = Method::kMfdK;
      run(mfd_k, cfg);
      cfg.method = Method::kHkd;
      cfg.temperature = rng.uniform(1.0, 4.0);
      cfg.kd_weight = rng.uniform(0.2, 0.8);
      run(hkd, cfg);
      cfg.method = Method::kFitNet;
      run(fitnet, cfg);

      cfg.method = Method::kMfdF;
      const auto analytic = objective_gradient(inst, cfg);
      const Tensor base_features = mlp_forward(inst.student, inst.batch.features).features;
      auto frozen = [&](std::span<const double> p) { return mfd_f_value(inst, p, cfg, &base_features); };
      auto live = [&](std::span<const double> p) { return mfd_f_value(inst, p, cfg, nullptr); };
      mfd_f.record(analytic, finite_diff_grad(frozen, theta, eps));
      // the stop-gradient must matter: differentiating through the pooled
      // side has to give a clearly different gradient
      const double diff = relative_error(analytic, finite_diff_grad(live, theta, eps));
      ++mfd_f_sg.stats.instances;
      if (!(diff > 100.0 * config.tol)) ++mfd_f_sg.stats.failures;
      mfd_f_sg.stats.max_rel_err = std::max(mfd_f_sg.stats.max_rel_err, diff);
    }
  }

  GradBatteryReport report;
  report.tol = config.tol;
  for (Check* c : {&sqdist, &kernel, &mmd, &reg_fixed, &reg_pair, &ce, &mfd, &mfd_k, &mfd_f, &mfd_f_sg,
                   &hkd, &fitnet}) {
    report.checks.push_back(c->stats);
  }
  return report;
}

bool VerificationReport::passed() const {
  return lemma1.passed() && lemma2.passed() && lemma2_equality.passed() && gradients.passed();
}

std::string VerificationReport::to_json() const {
  using nlohmann::ordered_json;
  auto trial = [](const TrialStats& s) {
    ordered_json j;
    j["trials"] = s.trials;
    j["violations"] = s.violations;
    j["not_applicable"] = s.not_applicable;
    j["min_slack"] = s.min_slack;
    j["mean_slack"] = s.mean_slack;
    j["max_abs_slack"] = s.max_abs_slack;
    j["passed"] = s.passed();
    return j;
  };
  ordered_json j;
  j["estimator"] =
      "biased V-statistic; both bounds are identities between finite weighted kernel sums of "
      "empirical mean embeddings under one shared bandwidth, so they hold exactly up to rounding";
  j["lemma1"] = trial(lemma1);
  j["lemma2"] = trial(lemma2);
  j["lemma2_equality"] = trial(lemma2_equality);
  ordered_json checks = ordered_json::array();
  for (const auto& c : gradients.checks) {
    ordered_json e;
    e["name"] = c.name;
    e["instances"] = c.instances;
    e["failures"] = c.failures;
    e["max_rel_err"] = c.max_rel_err;
    checks.push_back(e);
  }
  j["gradients"] = {{"tol", gradients.tol}, {"checks", checks}, {"passed", gradients.passed()}};
  j["passed"] = passed();
  return j.dump(2) + "\n";
}

VerificationReport run_verification(int trials, std::uint64_t seed, const GradBatteryConfig& grad,
                                    const LemmaOptions& options) {
  VerificationReport r;
  r.lemma1 = run_lemma1_trials(trials, seed, options);
  r.lemma2 = run_lemma2_trials(trials, seed, options);
  r.lemma2_equality = run_lemma2_equality_trials(trials, seed, options);
  r.gradients = grad_battery(grad);
  return r;
}

}  // namespace mfd
