#include <algorithm>
#include <cmath>
#include <numbers>

#include "cccpde/errors.hpp"
#include "cccpde/nn.hpp"

namespace cccpde::nn {

LossWithGrad bce_loss(const Matrix& p, const Matrix& labels) {
  if (p.rows() != labels.rows() || p.cols() != labels.cols()) {
    throw ShapeError("bce_loss: " + p.shape_string() + " vs " + labels.shape_string());
  }
  const double n = static_cast<double>(p.size());
  LossWithGrad out{0.0, Matrix(p.rows(), p.cols())};
  auto pv = p.values();
  auto yv = labels.values();
  auto gv = out.grad.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double raw = pv[i];
    const double q = std::clamp(raw, kProbabilityClamp, 1.0 - kProbabilityClamp);
    const double y = yv[i];
    out.value -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
    const bool clamped = raw != q;
    gv[i] = clamped ? 0.0 : (-y / q + (1.0 - y) / (1.0 - q)) / n;
  }
  out.value /= n;
  return out;
}

GaussianNll gaussian_nll_loss(const Matrix& mu, const Matrix& log_var, const Matrix& y) {
  if (mu.rows() != y.rows() || mu.cols() != y.cols() || log_var.rows() != y.rows() ||
      log_var.cols() != y.cols()) {
    throw ShapeError("gaussian_nll_loss: mu " + mu.shape_string() + ", log_var " +
                     log_var.shape_string() + ", y " + y.shape_string());
  }
  const double n = static_cast<double>(y.size());
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  GaussianNll out{0.0, Matrix(y.rows(), y.cols()), Matrix(y.rows(), y.cols())};
  auto m = mu.values();
  auto lv = log_var.values();
  auto yv = y.values();
  for (std::size_t i = 0; i < yv.size(); ++i) {
    const double inv_var = std::exp(-lv[i]);
    const double r = yv[i] - m[i];
    out.value += half_log_2pi + 0.5 * lv[i] + 0.5 * r * r * inv_var;
    out.grad_mu.values()[i] = -r * inv_var / n;
    out.grad_log_var.values()[i] = (0.5 - 0.5 * r * r * inv_var) / n;
  }
  out.value /= n;
  return out;
}

}  // namespace cccpde::nn
