#include <stdexcept>

#include "cccpde/nn.hpp"

namespace cccpde::nn {

Mlp::Mlp(std::span<const std::size_t> sizes, std::span<const Activation> activations, Rng& rng,
         bool zero_last)
    : acts_(activations.begin(), activations.end()) {
  if (sizes.size() < 2 || activations.size() != sizes.size() - 1) {
    throw std::invalid_argument("Mlp: need one activation per layer");
  }
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const bool last = i + 2 == sizes.size();
    layers_.push_back(zero_last && last ? DenseLayer(sizes[i], sizes[i + 1])
                                        : DenseLayer::glorot(sizes[i], sizes[i + 1], rng));
  }
}

Matrix Mlp::apply(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) h = activate(acts_[i], layers_[i].apply(h));
  return h;
}

Matrix Mlp::forward(const Matrix& x) {
  pre_.resize(layers_.size());
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    pre_[i] = layers_[i].forward(h);
    h = activate(acts_[i], pre_[i]);
  }
  return h;
}

Matrix Mlp::backward(const Matrix& upstream) {
  Matrix g = upstream;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i].backward(activation_grad(acts_[i], pre_[i], g));
  }
  return g;
}

void Mlp::collect(ParamList& out) {
  for (auto& layer : layers_) layer.collect(out);
}

}  // namespace cccpde::nn
