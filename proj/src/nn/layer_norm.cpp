#include <cmath>

#include "cccpde/errors.hpp"
#include "cccpde/nn.hpp"

namespace cccpde::nn {

LayerNorm::LayerNorm(std::size_t features)
    : gain_(Matrix(1, features, 1.0)), shift_(Matrix(1, features)) {}

namespace {

// Writes standardized rows into `out` and returns per-row 1/sqrt(var + eps).
std::vector<double> standardize_rows(const Matrix& x, Matrix& out) {
  const std::size_t f = x.cols();
  std::vector<double> inv_std(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(f);
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= static_cast<double>(f);
    inv_std[i] = 1.0 / std::sqrt(var + LayerNorm::kEpsilon);
    auto o = out.row(i);
    for (std::size_t j = 0; j < f; ++j) o[j] = (r[j] - mean) * inv_std[i];
  }
  return inv_std;
}

}  // namespace

Matrix LayerNorm::apply(const Matrix& x) const {
  if (x.cols() != features()) {
    throw ShapeError("LayerNorm: input " + x.shape_string() + " for " +
                     std::to_string(features()) + " features");
  }
  Matrix y(x.rows(), x.cols());
  standardize_rows(x, y);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    auto r = y.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = r[j] * gain_.value(0, j) + shift_.value(0, j);
  }
  return y;
}

Matrix LayerNorm::forward(const Matrix& x) {
  if (x.cols() != features()) {
    throw ShapeError("LayerNorm: input " + x.shape_string() + " for " +
                     std::to_string(features()) + " features");
  }
  normalized_ = Matrix(x.rows(), x.cols());
  inv_std_ = standardize_rows(x, normalized_);
  Matrix y = normalized_;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    auto r = y.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = r[j] * gain_.value(0, j) + shift_.value(0, j);
  }
  return y;
}

Matrix LayerNorm::backward(const Matrix& upstream) {
  const std::size_t f = features();
  const double fd = static_cast<double>(f);
  Matrix dx(upstream.rows(), f);
  for (std::size_t i = 0; i < upstream.rows(); ++i) {
    auto u = upstream.row(i);
    auto xh = normalized_.row(i);
    double sum_d = 0.0, sum_dx = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      const double d = u[j] * gain_.value(0, j);
      sum_d += d;
      sum_dx += d * xh[j];
      gain_.grad(0, j) += u[j] * xh[j];
      shift_.grad(0, j) += u[j];
    }
    auto o = dx.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      const double d = u[j] * gain_.value(0, j);
      o[j] = inv_std_[i] / fd * (fd * d - sum_d - xh[j] * sum_dx);
    }
  }
  return dx;
}

void LayerNorm::collect(ParamList& out) {
  out.push_back(&gain_);
  out.push_back(&shift_);
}

}  // namespace cccpde::nn
