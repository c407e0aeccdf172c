#include <cmath>

#include "cccpde/errors.hpp"
#include "cccpde/nn.hpp"

namespace cccpde::nn {

DenseLayer::DenseLayer(std::size_t in, std::size_t out)
    : weights_(Matrix(in, out)), bias_(Matrix(1, out)) {}

DenseLayer DenseLayer::glorot(std::size_t in, std::size_t out, Rng& rng) {
  DenseLayer layer(in, out);
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& w : layer.weights_.value.values()) w = (2.0 * rng.uniform() - 1.0) * limit;
  return layer;
}

Matrix DenseLayer::apply(const Matrix& x) const {
  if (x.cols() != in_size()) {
    throw ShapeError("DenseLayer: input " + x.shape_string() + " for weights " +
                     weights_.value.shape_string());
  }
  Matrix y = matmul(x, weights_.value);
  add_row_broadcast(y, bias_.value);
  return y;
}

Matrix DenseLayer::forward(const Matrix& x) {
  Matrix y = apply(x);
  input_ = x;
  return y;
}

Matrix DenseLayer::backward(const Matrix& upstream) {
  if (upstream.rows() != input_.rows() || upstream.cols() != out_size()) {
    throw ShapeError("DenseLayer::backward: upstream " + upstream.shape_string());
  }
  weights_.grad += matmul_at_b(input_, upstream);
  bias_.grad += column_sums(upstream);
  return matmul_a_bt(upstream, weights_.value);
}

void DenseLayer::collect(ParamList& out) {
  out.push_back(&weights_);
  out.push_back(&bias_);
}

}  // namespace cccpde::nn
