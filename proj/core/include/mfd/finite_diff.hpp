#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mfd {

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central-difference gradient of `f` at `params`. Throws NumericError if any
/// evaluation is non-finite and ParameterError if eps <= 0.
std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> params,
                                     double eps = 1e-5);

/// ||a - b|| / max(||a||, ||b||), or the absolute difference norm when both
/// vectors are (numerically) zero.
double relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace mfd
