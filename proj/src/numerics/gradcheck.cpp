#include "cccpde/gradcheck.hpp"

#include <cmath>

#include "cccpde/errors.hpp"

namespace cccpde {

Matrix finite_diff_grad(const ScalarFunction& f, const Matrix& x, double h) {
  if (!(h > 0.0)) throw DomainError("finite_diff_grad: step must be positive");
  Matrix grad(x.rows(), x.cols());
  Matrix probe = x;
  auto pv = probe.values();
  auto gv = grad.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double original = pv[i];
    pv[i] = original + h;
    const double up = f(probe);
    pv[i] = original - h;
    const double down = f(probe);
    pv[i] = original;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_diff_grad: non-finite function value at entry " +
                         std::to_string(i));
    }
    gv[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double relative_error(const Matrix& analytic, const Matrix& numeric) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  auto a = analytic.values();
  auto n = numeric.values();
  if (a.size() != n.size()) throw ShapeError("relative_error: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nn);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

}  // namespace cccpde
