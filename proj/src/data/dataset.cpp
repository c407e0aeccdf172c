#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cccpde/data.hpp"
#include "cccpde/rng.hpp"

namespace cccpde::data {

std::size_t Dataset::num_classes() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

std::vector<Label> Dataset::empty_classes() const {
  const auto counts = class_counts(num_classes());
  std::vector<Label> out;
  for (Label k = 0; k < counts.size(); ++k)
    if (counts[k] == 0) out.push_back(k);
  return out;
}

std::vector<std::size_t> Dataset::class_counts(std::size_t m) const {
  std::vector<std::size_t> counts(m, 0);
  for (Label l : labels)
    if (l < m) ++counts[l];
  return counts;
}

void Dataset::validate() const {
  if (labels.size() != features.rows()) {
    throw std::invalid_argument("Dataset '" + name + "': " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(features.rows()) + " rows");
  }
  if (!components.empty() && components.size() != labels.size()) {
    throw std::invalid_argument("Dataset '" + name + "': component tags do not match rows");
  }
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows) {
  Dataset out;
  out.name = ds.name;
  out.features = select_rows(ds.features, rows);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(ds.labels[r]);
  if (!ds.components.empty()) {
    for (std::size_t r : rows) out.components.push_back(ds.components[r]);
  }
  return out;
}

std::vector<double> column_stddev(const Matrix& x) {
  std::vector<double> mean(x.cols(), 0.0), sd(x.cols(), 0.0);
  if (x.rows() == 0) return sd;
  const double n = static_cast<double>(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) mean[j] += x(i, j);
  for (double& m : mean) m /= n;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) sd[j] += (x(i, j) - mean[j]) * (x(i, j) - mean[j]);
  for (double& s : sd) s = std::sqrt(s / n);
  return sd;
}

TrainTestSets split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split: fraction must be in (0, 1)");
  }
  Rng rng = Rng::derive(seed, "split");
  std::vector<std::size_t> order = random_permutation(ds.size(), rng);
  const auto n_train =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
  std::vector<std::size_t> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_rows(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {subset(ds, train_rows), subset(ds, test_rows)};
}

}  // namespace cccpde::data
