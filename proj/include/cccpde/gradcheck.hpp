#pragma once

#include <functional>

#include "cccpde/matrix.hpp"

namespace cccpde {

using ScalarFunction = std::function<double(const Matrix&)>;

/// Central-difference gradient of `f` at `x`. Throws NumericError if any
/// evaluation is non-finite.
Matrix finite_diff_grad(const ScalarFunction& f, const Matrix& x, double h = 1e-5);

/// ||a - b||_2 / (||a||_2 + ||b||_2); zero when both are zero.
double relative_error(const Matrix& analytic, const Matrix& numeric);

}  // namespace cccpde
