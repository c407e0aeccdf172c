#include <stdexcept>

#include "cccpde/nn.hpp"

namespace cccpde::nn {

DenseBlock::DenseBlock(std::size_t in, std::size_t out, double dropout_rate, Activation act,
                       Rng& rng)
    : rate_(dropout_rate), act_(act), dense_(DenseLayer::glorot(in, out, rng)), norm_(out) {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("DenseBlock: dropout rate must be in [0, 1)");
  }
}

Matrix DenseBlock::apply(const Matrix& x) const {
  return activate(act_, norm_.apply(dense_.apply(x)));
}

Matrix DenseBlock::forward(const Matrix& x, Rng& rng, bool training) {
  DropoutResult dropped = dropout(x, rate_, rng, training);
  mask_ = std::move(dropped.mask);
  pre_activation_ = norm_.forward(dense_.forward(dropped.output));
  return activate(act_, pre_activation_);
}

Matrix DenseBlock::backward(const Matrix& upstream) {
  Matrix g = activation_grad(act_, pre_activation_, upstream);
  g = dense_.backward(norm_.backward(g));
  return hadamard(g, mask_);
}

void DenseBlock::collect(ParamList& out) {
  dense_.collect(out);
  norm_.collect(out);
}

}  // namespace cccpde::nn
