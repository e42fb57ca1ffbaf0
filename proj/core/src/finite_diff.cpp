#include "mfd/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfd/errors.hpp"

namespace mfd {

std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> params,
                                     double eps) {
  if (!(eps > 0.0)) throw ParameterError("finite_diff_grad: eps must be positive");
  std::vector<double> theta(params.begin(), params.end());
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + eps;
    const double up = f(theta);
    theta[i] = saved - eps;
    const double down = f(theta);
    theta[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_diff_grad: non-finite evaluation at coordinate " +
                         std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("relative_error: length mismatch");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  if (denom < 1e-12) return std::sqrt(diff);
  return std::sqrt(diff) / denom;
}

}  // namespace mfd
