#include <stdexcept>

#include "cccpde/errors.hpp"
#include "cccpde/model.hpp"

namespace cccpde::model {

using nn::Activation;

FfnnModel::FfnnModel(const FfnnConfig& config, Rng& init_rng) : config_(config) {
  if (config_.dim == 0 || config_.width < 2 || config_.blocks == 0) {
    throw std::invalid_argument("FfnnConfig: need dim >= 1, width >= 2, blocks >= 1");
  }
  std::size_t in = config_.dim;
  for (std::size_t b = 0; b < config_.blocks; ++b) {
    blocks_.emplace_back(in, config_.width, config_.dropout, Activation::elu, init_rng);
    in = config_.width;
  }
  output_ = nn::DenseLayer::glorot(in, 1, init_rng);
}

std::vector<double> FfnnModel::predict(const Matrix& x) const {
  if (x.cols() != config_.dim) {
    throw ShapeError("FfnnModel: input " + x.shape_string() + " for dimension " +
                     std::to_string(config_.dim));
  }
  Matrix h = transform_.apply(x);
  for (const auto& block : blocks_) h = block.apply(h);
  const Matrix p = nn::activate(Activation::sigmoid, output_.apply(h));
  return {p.values().begin(), p.values().end()};
}

double FfnnModel::loss(const Matrix& x, std::span<const Label> labels, Rng& dropout_rng,
                       bool training) {
  if (x.cols() != config_.dim) {
    throw ShapeError("FfnnModel: input " + x.shape_string() + " for dimension " +
                     std::to_string(config_.dim));
  }
  if (labels.size() != x.rows()) throw ShapeError("FfnnModel: label count != rows");
  Matrix y(x.rows(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) throw std::out_of_range("FfnnModel: labels must be 0 or 1");
    y(i, 0) = static_cast<double>(labels[i]);
  }
  Matrix h = transform_.apply(x);
  for (auto& block : blocks_) h = block.forward(h, dropout_rng, training);
  const Matrix logits = output_.forward(h);
  const nn::LossWithGrad bce = nn::bce_loss(nn::activate(Activation::sigmoid, logits), y);
  Matrix g = output_.backward(nn::activation_grad(Activation::sigmoid, logits, bce.grad));
  for (std::size_t i = blocks_.size(); i-- > 0;) g = blocks_[i].backward(g);
  return bce.value;
}

double FfnnModel::loss_value(const Matrix& x, std::span<const Label> labels) const {
  const std::vector<double> p = predict(x);
  Matrix pm(x.rows(), 1), y(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    pm(i, 0) = p[i];
    y(i, 0) = static_cast<double>(labels[i]);
  }
  return nn::bce_loss(pm, y).value;
}

void FfnnModel::set_input_transform(data::Standardizer transform) {
  if (!transform.is_identity() && transform.dim() != config_.dim) {
    throw ShapeError("FfnnModel: input transform dimension != model dimension");
  }
  transform_ = std::move(transform);
}

nn::ParamList FfnnModel::params() {
  nn::ParamList out;
  for (auto& block : blocks_) block.collect(out);
  output_.collect(out);
  return out;
}

}  // namespace cccpde::model
