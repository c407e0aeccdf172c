#include <stdexcept>

#include "cccpde/nn.hpp"

namespace cccpde::nn {

DropoutResult dropout(const Matrix& x, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0, 1)");
  if (!training || rate == 0.0) return {x, Matrix(x.rows(), x.cols(), 1.0)};
  const double keep_scale = 1.0 / (1.0 - rate);
  DropoutResult r{Matrix(x.rows(), x.cols()), Matrix(x.rows(), x.cols())};
  auto xv = x.values();
  auto ov = r.output.values();
  auto mv = r.mask.values();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mv[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    ov[i] = xv[i] * mv[i];
  }
  return r;
}

}  // namespace cccpde::nn
