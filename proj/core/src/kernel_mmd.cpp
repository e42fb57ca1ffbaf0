#include "mfd/kernel_mmd.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mfd/errors.hpp"

namespace mfd {
namespace {

void require_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ParameterError("RBF bandwidth sigma^2 must be positive and finite, got " +
                         std::to_string(sigma2));
  }
}

void require_nonempty(const Tensor& x, const Tensor& y) {
  if (x.rank() != 2 || y.rank() != 2 || x.rows() == 0 || y.rows() == 0) {
    throw DomainError("mmd2_biased: both samples must contain at least one row");
  }
}

}  // namespace

void MmdConfig::validate() const {
  if (!(sigma_floor > 0.0)) throw ParameterError("MmdConfig: sigma_floor must be positive");
  if (bandwidth_mode == BandwidthMode::kFixedGlobal && !(fixed_sigma2 > 0.0)) {
    throw ParameterError("MmdConfig: fixed sigma^2 must be positive");
  }
}

Tensor rbf_kernel_matrix(const Tensor& x, const Tensor& y, double sigma2) {
  require_sigma2(sigma2);
  Tensor k = pairwise_sqdist(x, y);
  const double factor = -1.0 / (2.0 * sigma2);
  for (double& v : k.values()) v = std::exp(factor * v);
  return k;
}

Var rbf_kernel_matrix(Var x, Var y, double sigma2) {
  require_sigma2(sigma2);
  return exp(scale(pairwise_sqdist(x, y), -1.0 / (2.0 * sigma2)));
}

double bandwidth_mean_sqdist(const Tensor& x, const Tensor& y, double sigma_floor) {
  if (x.cols() != y.cols()) throw ShapeError("bandwidth_mean_sqdist: feature dimensions differ");
  const std::size_t n = x.rows() + y.rows(), d = x.cols();
  if (n < 2) return sigma_floor;
  // sum over unordered pairs of |z_i - z_j|^2 equals n * sum_i |z_i - mean|^2
  std::vector<double> centre(d, 0.0);
  for (const Tensor* t : {&x, &y}) {
    for (std::size_t i = 0; i < t->rows(); ++i) {
      auto r = t->row(i);
      for (std::size_t k = 0; k < d; ++k) centre[k] += r[k];
    }
  }
  for (double& c : centre) c /= static_cast<double>(n);
  double spread = 0.0;
  for (const Tensor* t : {&x, &y}) {
    for (std::size_t i = 0; i < t->rows(); ++i) {
      auto r = t->row(i);
      for (std::size_t k = 0; k < d; ++k) spread += (r[k] - centre[k]) * (r[k] - centre[k]);
    }
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double sigma2 = static_cast<double>(n) * spread / pairs;
  return sigma2 < sigma_floor ? sigma_floor : sigma2;
}

double resolve_bandwidth(const MmdConfig& config, const Tensor& x, const Tensor& y) {
  if (config.bandwidth_mode == BandwidthMode::kFixedGlobal) return config.fixed_sigma2;
  return bandwidth_mean_sqdist(x, y, config.sigma_floor);
}

double mmd2_biased(const Tensor& x, const Tensor& y, double sigma2) {
  require_nonempty(x, y);
  return mean(rbf_kernel_matrix(x, x, sigma2)) + mean(rbf_kernel_matrix(y, y, sigma2)) -
         2.0 * mean(rbf_kernel_matrix(x, y, sigma2));
}

Var mmd2_biased(Var x, Var y, double sigma2) {
  require_nonempty(x.value(), y.value());
  Var kxx = mean(rbf_kernel_matrix(x, x, sigma2));
  Var kyy = mean(rbf_kernel_matrix(y, y, sigma2));
  Var kxy = mean(rbf_kernel_matrix(x, y, sigma2));
  return sub(add(kxx, kyy), scale(kxy, 2.0));
}

Var mfd_regularizer(Graph& graph, const ClassPools& teacher,
                    const std::map<GroupClass, Var>& student, const MmdConfig& config) {
  config.validate();
  Var total = graph.constant(Tensor::scalar(0.0));
  for (const auto& [cell, features] : student) {
    auto pool = teacher.find(cell.label);
    if (pool == teacher.end() || pool->second.rows() == 0) {
      throw ConfigError("mfd_regularizer: no teacher features for class " +
                        std::to_string(cell.label));
    }
    const double sigma2 = resolve_bandwidth(config, pool->second, features.value());
    Var t = graph.constant(pool->second);
    total = add(total, mmd2_biased(t, features, sigma2));
  }
  return total;
}

double mfd_regularizer(const ClassPools& teacher, const GroupedFeatures& student,
                       const MmdConfig& config) {
  config.validate();
  double total = 0.0;
  for (const auto& [cell, features] : student) {
    auto pool = teacher.find(cell.label);
    if (pool == teacher.end() || pool->second.rows() == 0) {
      throw ConfigError("mfd_regularizer: no teacher features for class " +
                        std::to_string(cell.label));
    }
    total += mmd2_biased(pool->second, features, resolve_bandwidth(config, pool->second, features));
  }
  return total;
}

}  // namespace mfd
