#include <cmath>

#include "cccpde/errors.hpp"
#include "cccpde/nn.hpp"

namespace cccpde::nn {

Adam::Adam(AdamOptions options) : options_(options) {}

void Adam::step(const ParamList& params) {
  if (first_.empty()) {
    for (const Param* p : params) {
      first_.emplace_back(p->value.rows(), p->value.cols());
      second_.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (params.size() != first_.size()) throw ShapeError("Adam::step: parameter list changed");
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(options_.beta1, t);
  const double c2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    if (p.grad.rows() != first_[k].rows() || p.grad.cols() != first_[k].cols() ||
        p.value.rows() != p.grad.rows() || p.value.cols() != p.grad.cols()) {
      throw ShapeError("Adam::step: gradient " + p.grad.shape_string() + " for moment " +
                       first_[k].shape_string());
    }
    auto w = p.value.values();
    auto g = p.grad.values();
    auto m = first_[k].values();
    auto v = second_[k].values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g[i];
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

}  // namespace cccpde::nn
