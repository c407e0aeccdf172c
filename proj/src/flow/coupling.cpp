#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cccpde/errors.hpp"
#include "cccpde/flow.hpp"

namespace cccpde::flow {

using nn::Activation;

std::vector<double> standard_normal_log_density(const Matrix& z) {
  const double norm = -0.5 * static_cast<double>(z.cols()) * std::log(2.0 * std::numbers::pi);
  std::vector<double> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double sq = 0.0;
    for (double v : z.row(i)) sq += v * v;
    out[i] = norm - 0.5 * sq;
  }
  return out;
}

namespace {

nn::Mlp make_subnet(std::size_t in, std::size_t hidden, std::size_t out, Activation last,
                    Rng& rng, bool zero_last) {
  const std::size_t sizes[] = {in, hidden, hidden, out};
  const Activation acts[] = {Activation::leaky_relu, Activation::leaky_relu, last};
  return nn::Mlp(sizes, acts, rng, zero_last);
}

void require_cols(const Matrix& x, std::size_t dim, const char* op) {
  if (x.cols() != dim) {
    throw ShapeError(std::string(op) + ": input " + x.shape_string() + " for dimension " +
                     std::to_string(dim));
  }
}

}  // namespace

CouplingLayer::CouplingLayer(std::size_t dim, std::size_t hidden, Rng& rng, bool zero_init_output)
    : CouplingLayer(dim, hidden, random_permutation(dim, rng), rng, zero_init_output) {}

CouplingLayer::CouplingLayer(std::size_t dim, std::size_t hidden,
                             std::vector<std::size_t> permutation, Rng& rng,
                             bool zero_init_output)
{
  if (dim < 2) throw std::invalid_argument("CouplingLayer: dimension must be at least 2");
  if (permutation.size() != dim) throw ShapeError("CouplingLayer: permutation length != dim");
  set_permutation(std::move(permutation));
  const std::size_t d = dim / 2;
  scale_net_ = make_subnet(d, hidden, dim - d, Activation::tanh, rng, zero_init_output);
  shift_net_ = make_subnet(d, hidden, dim - d, Activation::identity, rng, zero_init_output);
}

void CouplingLayer::set_permutation(std::vector<std::size_t> permutation) {
  const std::size_t dim = permutation.size();
  if (!permutation_.empty() && dim != permutation_.size()) {
    throw ShapeError("CouplingLayer: permutation length != dim");
  }
  std::vector<std::size_t> inverse(dim, dim);
  for (std::size_t j = 0; j < dim; ++j) {
    if (permutation[j] >= dim || inverse[permutation[j]] != dim) {
      throw std::invalid_argument("CouplingLayer: permutation is not a bijection");
    }
    inverse[permutation[j]] = j;
  }
  permutation_ = std::move(permutation);
  inverse_ = std::move(inverse);
}

Matrix CouplingLayer::permute(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto src = x.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = src[permutation_[j]];
  }
  return out;
}

Matrix CouplingLayer::unpermute(const Matrix& xp) const {
  Matrix out(xp.rows(), xp.cols());
  for (std::size_t i = 0; i < xp.rows(); ++i) {
    auto src = xp.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[permutation_[j]] = src[j];
  }
  return out;
}

FlowOutput CouplingLayer::transform(const Matrix& x) const {
  require_cols(x, dim(), "CouplingLayer::transform");
  const Matrix xp = permute(x);
  const Matrix passive = slice_cols(xp, 0, split());
  Matrix active = slice_cols(xp, split(), dim());
  const Matrix s = scale_net_.apply(passive);
  const Matrix t = shift_net_.apply(passive);
  FlowOutput out{Matrix(), std::vector<double>(x.rows(), 0.0)};
  for (std::size_t i = 0; i < active.rows(); ++i) {
    auto a = active.row(i);
    for (std::size_t j = 0; j < a.size(); ++j) {
      a[j] = a[j] * std::exp(s(i, j)) + t(i, j);
      out.log_det[i] += s(i, j);
    }
  }
  out.y = hconcat(passive, active);
  return out;
}

FlowOutput CouplingLayer::forward(const Matrix& x) {
  require_cols(x, dim(), "CouplingLayer::forward");
  const Matrix xp = permute(x);
  passive_ = slice_cols(xp, 0, split());
  active_ = slice_cols(xp, split(), dim());
  const Matrix s = scale_net_.forward(passive_);
  const Matrix t = shift_net_.forward(passive_);
  scale_exp_ = Matrix(s.rows(), s.cols());
  FlowOutput out{Matrix(), std::vector<double>(x.rows(), 0.0)};
  Matrix y_active(active_.rows(), active_.cols());
  for (std::size_t i = 0; i < active_.rows(); ++i) {
    for (std::size_t j = 0; j < active_.cols(); ++j) {
      scale_exp_(i, j) = std::exp(s(i, j));
      y_active(i, j) = active_(i, j) * scale_exp_(i, j) + t(i, j);
      out.log_det[i] += s(i, j);
    }
  }
  out.y = hconcat(passive_, y_active);
  return out;
}

Matrix CouplingLayer::backward(const Matrix& grad_y, std::span<const double> grad_log_det) {
  if (grad_y.rows() != active_.rows() || grad_y.cols() != dim() ||
      grad_log_det.size() != grad_y.rows()) {
    throw ShapeError("CouplingLayer::backward: gradient " + grad_y.shape_string());
  }
  const Matrix grad_ya = slice_cols(grad_y, 0, split());
  const Matrix grad_yb = slice_cols(grad_y, split(), dim());
  Matrix grad_active(grad_yb.rows(), grad_yb.cols());
  Matrix grad_s(grad_yb.rows(), grad_yb.cols());
  for (std::size_t i = 0; i < grad_yb.rows(); ++i) {
    for (std::size_t j = 0; j < grad_yb.cols(); ++j) {
      grad_active(i, j) = grad_yb(i, j) * scale_exp_(i, j);
      grad_s(i, j) = grad_yb(i, j) * active_(i, j) * scale_exp_(i, j) + grad_log_det[i];
    }
  }
  Matrix grad_passive = grad_ya;
  grad_passive += scale_net_.backward(grad_s);
  grad_passive += shift_net_.backward(grad_yb);
  return unpermute(hconcat(grad_passive, grad_active));
}

Matrix CouplingLayer::inverse(const Matrix& y) const {
  require_cols(y, dim(), "CouplingLayer::inverse");
  const Matrix passive = slice_cols(y, 0, split());
  Matrix active = slice_cols(y, split(), dim());
  const Matrix s = scale_net_.apply(passive);
  const Matrix t = shift_net_.apply(passive);
  for (std::size_t i = 0; i < active.rows(); ++i) {
    auto a = active.row(i);
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = (a[j] - t(i, j)) * std::exp(-s(i, j));
  }
  return unpermute(hconcat(passive, active));
}

void CouplingLayer::collect(nn::ParamList& out) {
  scale_net_.collect(out);
  shift_net_.collect(out);
}

}  // namespace cccpde::flow
