#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mfd/kernel_mmd.hpp"
#include "mfd/random.hpp"

namespace mfd {

struct LemmaCheckResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // lhs - rhs
  double tol = 1e-9;
  bool holds = false;  // slack >= -tol, and only when applicable
  bool applicable = true;
  bool equality = false;  // |slack| <= tol
};

/// k(x, x') as a function of the squared distance and sigma^2.
using KernelFn = std::function<double(double sqdist, double sigma2)>;

double rbf_from_sqdist(double sqdist, double sigma2);
/// Corrupted kernel with the sign of the exponent flipped; not positive
/// definite. Used to show the checks detect a broken kernel.
double negated_exponent_kernel(double sqdist, double sigma2);

struct LemmaOptions {
  double tol = 1e-9;
  KernelFn kernel = rbf_from_sqdist;
};

/// Jensen bound over cells c = (a, y) with weights p(c):
///   sum_c p(c) D^2(mix_y^T, S_c) >= D^2(sum_c p(c) T_c, sum_c p(c) S_c)
/// where mix_y^T is the p(a|y)-weighted teacher embedding of class y.
/// Computed exactly from the Gram matrix of the cell mean embeddings.
/// Requires the same cell keys in teacher, student and weights; weights
/// non-negative and summing to 1 (ParameterError otherwise). Reports
/// applicable = false unless the bandwidth mode is FixedGlobal.
LemmaCheckResult check_lemma1(const GroupedFeatures& teacher, const GroupedFeatures& student,
                              const std::map<GroupClass, double>& weights, const MmdConfig& mmd,
                              const LemmaOptions& options = {});

/// Distance-to-mean bound for one class:
///   sum_a D^2(T, S_a) >= (1 / (2|A|)) sum_{a,a'} D^2(S_a, S_a')
/// Throws DomainError on an empty sample.
LemmaCheckResult check_lemma2(const Tensor& teacher_class, const std::vector<Tensor>& student_groups,
                              const MmdConfig& mmd, const LemmaOptions& options = {});

struct Lemma1Instance {
  GroupedFeatures teacher;
  GroupedFeatures student;
  std::map<GroupClass, double> weights;
  double sigma2 = 1.0;
};

struct Lemma2Instance {
  Tensor teacher;
  std::vector<Tensor> groups;
  double sigma2 = 1.0;
};

/// 2-4 groups, 2-5 classes, 3-10 points per cell, d in [1, 8], shared
/// sigma^2 in [0.25, 4]. Weights alternate between uniform and random.
Lemma1Instance random_lemma1_instance(Rng& rng, bool uniform_weights);
/// 2-4 groups of 3-10 points, d in [1, 8]. With `equal_concat` all groups
/// have one size and the teacher is their concatenation.
Lemma2Instance random_lemma2_instance(Rng& rng, bool equal_concat);

struct TrialStats {
  std::string name;
  int trials = 0;
  int violations = 0;
  int not_applicable = 0;
  double min_slack = 0.0;
  double mean_slack = 0.0;
  double max_abs_slack = 0.0;

  bool passed() const { return trials > 0 && violations == 0 && not_applicable == 0; }
};

TrialStats run_lemma1_trials(int trials, std::uint64_t seed, const LemmaOptions& options = {});
TrialStats run_lemma2_trials(int trials, std::uint64_t seed, const LemmaOptions& options = {});
/// Equality construction of lemma 2: slack must vanish, so a trial counts as
/// a violation when |slack| > tol.
TrialStats run_lemma2_equality_trials(int trials, std::uint64_t seed,
                                      const LemmaOptions& options = {});

struct GradCheckStats {
  std::string name;
  int instances = 0;
  int failures = 0;
  double max_rel_err = 0.0;
};

struct GradBatteryConfig {
  int instances = 20;
  std::uint64_t seed = 0;
  double tol = 1e-4;
  double eps = 1e-5;
};

struct GradBatteryReport {
  std::vector<GradCheckStats> checks;
  double tol = 1e-4;

  bool passed() const;
};

/// Finite-difference checks of every differentiable operation the
/// objectives rely on, the MMD regularizer under both bandwidth modes, and
/// each objective with respect to all student parameters. The MFD-F check
/// freezes the pooled class side in the oracle and also confirms that the
/// unfrozen derivative differs.
GradBatteryReport grad_battery(const GradBatteryConfig& config = {});

struct VerificationReport {
  TrialStats lemma1;
  TrialStats lemma2;
  TrialStats lemma2_equality;
  GradBatteryReport gradients;

  bool passed() const;
  std::string to_json() const;
};

VerificationReport run_verification(int trials = 1000, std::uint64_t seed = 0,
                                    const GradBatteryConfig& grad = {},
                                    const LemmaOptions& options = {});

}  // namespace mfd
