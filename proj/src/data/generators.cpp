#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cccpde/data.hpp"
#include "cccpde/rng.hpp"

namespace cccpde::data {

namespace {

// Lower Cholesky factor of a dense covariance; throws if not positive definite.
std::vector<double> cholesky(const std::vector<double>& cov, std::size_t d) {
  std::vector<double> l(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = cov[i * d + j];
      for (std::size_t k = 0; k < j; ++k) sum -= l[i * d + k] * l[j * d + k];
      if (i == j) {
        if (!(sum > 0.0)) throw std::invalid_argument("gen_mixture: covariance is not positive definite");
        l[i * d + i] = std::sqrt(sum);
      } else {
        l[i * d + j] = sum / l[j * d + j];
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (cov[i * d + j] != cov[j * d + i]) {
        throw std::invalid_argument("gen_mixture: covariance is not symmetric");
      }
  return l;
}

std::vector<double> factor(const MixtureComponent& c) {
  const std::size_t d = c.center.size();
  if (c.covariance.size() == d) {
    std::vector<double> l(d * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      if (!(c.covariance[j] > 0.0)) {
        throw std::invalid_argument("gen_mixture: covariance is not positive definite");
      }
      l[j * d + j] = std::sqrt(c.covariance[j]);
    }
    return l;
  }
  if (c.covariance.size() == d * d) return cholesky(c.covariance, d);
  throw std::invalid_argument("gen_mixture: covariance must have D or D*D entries");
}

std::vector<std::size_t> spread(std::size_t total, std::size_t parts) {
  std::vector<std::size_t> out(parts, total / parts);
  for (std::size_t i = 0; i < total % parts; ++i) ++out[i];
  return out;
}

}  // namespace

Dataset gen_mixture(std::span<const MixtureComponent> components, std::uint64_t seed,
                    std::string name) {
  if (components.empty()) throw std::invalid_argument("gen_mixture: no components");
  const std::size_t d = components.front().center.size();
  std::size_t rows = 0;
  for (const auto& c : components) {
    if (c.center.size() != d) throw std::invalid_argument("gen_mixture: inconsistent dimensions");
    if (c.count == 0) throw std::invalid_argument("gen_mixture: component count must be >= 1");
    rows += c.count;
  }
  Rng rng(seed);
  Dataset ds;
  ds.name = std::move(name);
  ds.features = Matrix(rows, d);
  std::size_t r = 0;
  std::vector<double> z(d);
  for (std::size_t ci = 0; ci < components.size(); ++ci) {
    const auto& c = components[ci];
    const std::vector<double> l = factor(c);
    for (std::size_t n = 0; n < c.count; ++n, ++r) {
      for (double& v : z) v = rng.gaussian();
      auto out = ds.features.row(r);
      for (std::size_t i = 0; i < d; ++i) {
        double v = c.center[i];
        for (std::size_t k = 0; k <= i; ++k) v += l[i * d + k] * z[k];
        out[i] = v;
      }
      ds.labels.push_back(c.label);
      ds.components.push_back(ci);
    }
  }
  return ds;
}

std::vector<std::string> preset_names() { return {"separable", "overlap", "composite", "openset"}; }

std::vector<MixtureComponent> preset_components(std::string_view preset, std::size_t total) {
  const double tight = 0.25;
  if (preset == "separable") {
    const auto n = spread(total, 2);
    return {{0, {-2.0, 0.0}, {tight, tight}, n[0], false},
            {1, {2.0, 0.0}, {tight, tight}, n[1], false}};
  }
  if (preset == "overlap") {
    const auto n = spread(total, 2);
    return {{0, {0.0, 0.0}, {1.0, 1.0}, n[0], false}, {1, {0.0, 0.0}, {1.0, 1.0}, n[1], false}};
  }
  if (preset == "composite") {
    // Each class has a disjoint cluster plus a share of one fully shared cluster.
    const auto n = spread(total, 4);
    return {{0, {-3.0, 0.0}, {tight, tight}, n[0], false},
            {1, {3.0, 0.0}, {tight, tight}, n[1], false},
            {0, {0.0, 0.0}, {0.5, 0.5}, n[2], false},
            {1, {0.0, 0.0}, {0.5, 0.5}, n[3], false}};
  }
  if (preset == "openset") {
    const auto n = spread(total, 3);
    return {{0, {-2.0, -1.5}, {tight, tight}, n[0], false},
            {1, {2.0, -1.5}, {tight, tight}, n[1], false},
            {2, {0.0, 2.0}, {tight, tight}, n[2], true}};
  }
  std::string known;
  for (const auto& p : preset_names()) known += (known.empty() ? "" : ", ") + p;
  throw std::invalid_argument("unknown preset '" + std::string(preset) + "' (known: " + known + ")");
}

TrainTestSets make_preset(std::string_view preset, std::size_t n_train, std::size_t n_test,
                          std::uint64_t seed) {
  std::vector<MixtureComponent> train_parts;
  for (auto& c : preset_components(preset, 1)) {
    if (!c.held_out) train_parts.push_back(c);
  }
  const auto train_counts = spread(n_train, train_parts.size());
  for (std::size_t i = 0; i < train_parts.size(); ++i) train_parts[i].count = train_counts[i];

  std::vector<MixtureComponent> test_parts = preset_components(preset, n_test);
  TrainTestSets out{gen_mixture(train_parts, Rng::derive(seed, "data/train").next_u64(),
                                std::string(preset) + "-train"),
                    gen_mixture(test_parts, Rng::derive(seed, "data/test").next_u64(),
                                std::string(preset) + "-test")};
  for (std::size_t i = 0; i < out.train.size(); ++i) {
    if (train_parts[out.train.components[i]].held_out) {
      throw std::logic_error("make_preset: held-out component leaked into training data");
    }
  }
  return out;
}

double regression_mean(double x) { return std::sin(x); }
double regression_stddev(double x) { return 0.1 + 0.1 * std::abs(x); }

RegressionSample gen_regression(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  RegressionSample s;
  s.x.reserve(n);
  s.y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -3.0 + 6.0 * rng.uniform();
    s.x.push_back(x);
    s.y.push_back(regression_mean(x) + regression_stddev(x) * rng.gaussian());
  }
  return s;
}

}  // namespace cccpde::data
