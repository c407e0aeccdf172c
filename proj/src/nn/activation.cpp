#include <cmath>
#include <stdexcept>
#include <string>

#include "cccpde/errors.hpp"
#include "cccpde/nn.hpp"

namespace cccpde::nn {

void zero_grads(const ParamList& params) {
  for (Param* p : params) p->zero_grad();
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "elu") return Activation::elu;
  if (name == "leaky_relu") return Activation::leaky_relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(Activation act) {
  switch (act) {
    case Activation::identity: return "identity";
    case Activation::elu: return "elu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  throw std::invalid_argument("unknown activation tag");
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double apply_one(Activation act, double x) {
  switch (act) {
    case Activation::identity: return x;
    case Activation::elu: return x >= 0.0 ? x : std::expm1(x);
    case Activation::leaky_relu: return x >= 0.0 ? x : kLeakyReluSlope * x;
    case Activation::tanh: return std::tanh(x);
    case Activation::sigmoid: return sigmoid(x);
  }
  throw std::invalid_argument("unknown activation tag");
}

double derivative(Activation act, double x) {
  switch (act) {
    case Activation::identity: return 1.0;
    case Activation::elu: return x >= 0.0 ? 1.0 : std::exp(x);
    case Activation::leaky_relu: return x >= 0.0 ? 1.0 : kLeakyReluSlope;
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
  }
  throw std::invalid_argument("unknown activation tag");
}

}  // namespace

Matrix activate(Activation act, const Matrix& x) {
  if (act == Activation::identity) return x;
  Matrix y(x.rows(), x.cols());
  auto xv = x.values();
  auto yv = y.values();
  for (std::size_t i = 0; i < xv.size(); ++i) yv[i] = apply_one(act, xv[i]);
  return y;
}

Matrix activation_grad(Activation act, const Matrix& x, const Matrix& upstream) {
  if (x.rows() != upstream.rows() || x.cols() != upstream.cols()) {
    throw ShapeError("activation_grad: " + x.shape_string() + " vs " + upstream.shape_string());
  }
  if (act == Activation::identity) return upstream;
  Matrix g(x.rows(), x.cols());
  auto xv = x.values();
  auto uv = upstream.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < xv.size(); ++i) gv[i] = uv[i] * derivative(act, xv[i]);
  return g;
}

}  // namespace cccpde::nn
