#include "cccpde/errors.hpp"
#include "cccpde/flow.hpp"

namespace cccpde::flow {

FlowStack::FlowStack(std::size_t dim, std::size_t depth, std::size_t hidden, Rng& rng,
                     bool zero_init_output)
    : dim_(dim) {
  for (std::size_t i = 0; i < depth; ++i) layers_.emplace_back(dim, hidden, rng, zero_init_output);
}

void FlowStack::push_back(CouplingLayer layer) {
  if (layer.dim() != dim_) throw ShapeError("FlowStack: layer dimension differs from stack");
  layers_.push_back(std::move(layer));
}

FlowOutput FlowStack::transform(const Matrix& x) const {
  if (x.cols() != dim_) {
    throw ShapeError("FlowStack: input " + x.shape_string() + " for dimension " +
                     std::to_string(dim_));
  }
  FlowOutput out{x, std::vector<double>(x.rows(), 0.0)};
  for (const auto& layer : layers_) {
    FlowOutput step = layer.transform(out.y);
    out.y = std::move(step.y);
    for (std::size_t i = 0; i < out.log_det.size(); ++i) out.log_det[i] += step.log_det[i];
  }
  return out;
}

FlowOutput FlowStack::forward(const Matrix& x) {
  if (x.cols() != dim_) {
    throw ShapeError("FlowStack: input " + x.shape_string() + " for dimension " +
                     std::to_string(dim_));
  }
  FlowOutput out{x, std::vector<double>(x.rows(), 0.0)};
  for (auto& layer : layers_) {
    FlowOutput step = layer.forward(out.y);
    out.y = std::move(step.y);
    for (std::size_t i = 0; i < out.log_det.size(); ++i) out.log_det[i] += step.log_det[i];
  }
  return out;
}

Matrix FlowStack::backward(const Matrix& grad_z, std::span<const double> grad_log_det) {
  Matrix g = grad_z;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i].backward(g, grad_log_det);
  return g;
}

Matrix FlowStack::inverse(const Matrix& z) const {
  if (z.cols() != dim_) {
    throw ShapeError("FlowStack: input " + z.shape_string() + " for dimension " +
                     std::to_string(dim_));
  }
  Matrix x = z;
  for (std::size_t i = layers_.size(); i-- > 0;) x = layers_[i].inverse(x);
  return x;
}

std::vector<double> FlowStack::log_density(const Matrix& x) const {
  FlowOutput out = transform(x);
  std::vector<double> lp = standard_normal_log_density(out.y);
  for (std::size_t i = 0; i < lp.size(); ++i) lp[i] += out.log_det[i];
  return lp;
}

Matrix FlowStack::sample(Rng& rng, std::size_t n) const {
  Matrix z(n, dim_);
  for (double& v : z.values()) v = rng.gaussian();
  return inverse(z);
}

void FlowStack::collect(nn::ParamList& out) {
  for (auto& layer : layers_) layer.collect(out);
}

}  // namespace cccpde::flow
