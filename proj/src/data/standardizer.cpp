#include <cmath>
#include <stdexcept>

#include "cccpde/data.hpp"
#include "cccpde/errors.hpp"

namespace cccpde::data {

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.size() != stddev_.size()) throw ShapeError("Standardizer: mean/stddev length mismatch");
  for (double s : stddev_)
    if (!(s > 0.0)) throw std::invalid_argument("Standardizer: stddev must be positive");
}

Standardizer Standardizer::fit(const Matrix& train) {
  if (train.rows() == 0) throw std::invalid_argument("Standardizer::fit: no rows");
  std::vector<double> mean(train.cols(), 0.0);
  const double n = static_cast<double>(train.rows());
  for (std::size_t i = 0; i < train.rows(); ++i)
    for (std::size_t j = 0; j < train.cols(); ++j) mean[j] += train(i, j);
  for (double& m : mean) m /= n;
  std::vector<double> sd = column_stddev(train);
  Standardizer s;
  for (std::size_t j = 0; j < sd.size(); ++j) {
    if (!(sd[j] > 0.0)) {
      sd[j] = 1.0;
      s.degenerate_.push_back(j);
    }
  }
  s.mean_ = std::move(mean);
  s.stddev_ = std::move(sd);
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (is_identity()) return x;
  if (x.cols() != dim()) {
    throw ShapeError("Standardizer: input " + x.shape_string() + " for dimension " +
                     std::to_string(dim()));
  }
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - mean_[j]) / stddev_[j];
  }
  return out;
}

Matrix Standardizer::invert(const Matrix& z) const {
  if (is_identity()) return z;
  if (z.cols() != dim()) {
    throw ShapeError("Standardizer: input " + z.shape_string() + " for dimension " +
                     std::to_string(dim()));
  }
  Matrix out = z;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = r[j] * stddev_[j] + mean_[j];
  }
  return out;
}

Dataset Standardizer::apply(const Dataset& ds) const {
  Dataset out = ds;
  out.features = apply(ds.features);
  return out;
}

double Standardizer::log_scale() const {
  double s = 0.0;
  for (double v : stddev_) s += std::log(v);
  return s;
}

}  // namespace cccpde::data
