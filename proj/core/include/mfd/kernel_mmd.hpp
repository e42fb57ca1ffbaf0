#pragma once

#include <compare>
#include <map>

#include "mfd/graph.hpp"
#include "mfd/tensor.hpp"

namespace mfd {

enum class BandwidthMode {
  /// sigma^2 = mean squared distance over distinct pairs of the union of the
  /// two samples entering each MMD term, recomputed for every call.
  kPerPairMeanSqDist,
  /// One sigma^2 shared by every term, so all terms live in one RKHS.
  kFixedGlobal,
};

struct MmdConfig {
  BandwidthMode bandwidth_mode = BandwidthMode::kPerPairMeanSqDist;
  double fixed_sigma2 = 1.0;
  double sigma_floor = 1e-6;

  static MmdConfig fixed(double sigma2) {
    return MmdConfig{BandwidthMode::kFixedGlobal, sigma2, 1e-6};
  }
  void validate() const;
};

/// (group, class) cell key; orders lexicographically by group then class.
struct GroupClass {
  int group = 0;
  int label = 0;
  friend auto operator<=>(const GroupClass&, const GroupClass&) = default;
};

/// Feature rows partitioned by (group, class).
using GroupedFeatures = std::map<GroupClass, Tensor>;
/// Feature rows pooled per class.
using ClassPools = std::map<int, Tensor>;

/// exp(-|x_i - y_j|^2 / (2 sigma^2)). Throws ParameterError if sigma2 <= 0.
Tensor rbf_kernel_matrix(const Tensor& x, const Tensor& y, double sigma2);
Var rbf_kernel_matrix(Var x, Var y, double sigma2);

/// Mean squared Euclidean distance over all unordered distinct pairs of
/// rows of x and y taken together, floored at `sigma_floor`.
double bandwidth_mean_sqdist(const Tensor& x, const Tensor& y, double sigma_floor = 1e-6);

/// sigma^2 for one MMD term between x and y under `config`.
double resolve_bandwidth(const MmdConfig& config, const Tensor& x, const Tensor& y);

/// Biased (V-statistic) squared MMD:
///   mean(K_xx) + mean(K_yy) - 2 mean(K_xy)
/// with diagonals included. Equals the squared RKHS distance between the
/// empirical mean embeddings. Throws DomainError on an empty sample.
double mmd2_biased(const Tensor& x, const Tensor& y, double sigma2);
Var mmd2_biased(Var x, Var y, double sigma2);

/// Sum over present student cells (a, y) of MMD^2(teacher pool of y, student
/// cell), each with its own bandwidth per `config`. Teacher pools are
/// constants; the bandwidth is evaluated on current values and carries no
/// gradient. Throws ConfigError if a student class has no teacher pool.
Var mfd_regularizer(Graph& graph, const ClassPools& teacher, const std::map<GroupClass, Var>& student,
                    const MmdConfig& config);
double mfd_regularizer(const ClassPools& teacher, const GroupedFeatures& student,
                       const MmdConfig& config);

}  // namespace mfd
