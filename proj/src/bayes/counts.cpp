#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cccpde/bayes.hpp"
#include "cccpde/errors.hpp"
#include "cccpde/special.hpp"

namespace cccpde::bayes {

Volume Volume::from_value(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("Volume: must be positive and finite");
  return Volume(std::log(v));
}

Volume Volume::from_log(double log_v) {
  if (!std::isfinite(log_v)) throw DomainError("Volume: log volume must be finite");
  return Volume(log_v);
}

Volume Volume::from_stddev(std::span<const double> stddev, double fraction) {
  if (!(fraction > 0.0)) throw DomainError("Volume: fraction must be positive");
  double log_v = 0.0;
  for (double s : stddev) {
    if (!(s > 0.0)) throw DomainError("Volume: stddev entries must be positive");
    log_v += std::log(fraction * s);
  }
  return Volume(log_v);
}

double Volume::value() const { return std::exp(log_v_); }

PseudoCounts pseudo_counts(std::span<const double> log_densities,
                           std::span<const double> class_counts, Volume volume) {
  if (log_densities.size() != class_counts.size()) {
    throw ShapeError("pseudo_counts: " + std::to_string(log_densities.size()) +
                     " densities for " + std::to_string(class_counts.size()) + " classes");
  }
  PseudoCounts out{std::vector<double>(log_densities.size(), 0.0), volume, CountMode::pointwise};
  for (std::size_t k = 0; k < log_densities.size(); ++k) {
    if (!(class_counts[k] >= 0.0)) throw std::invalid_argument("pseudo_counts: N_k must be >= 0");
    if (class_counts[k] == 0.0 || std::isnan(log_densities[k])) continue;
    const double e = volume.log_value() + std::log(class_counts[k]) + log_densities[k];
    out.counts[k] = e < kCountUnderflowLog ? 0.0 : std::exp(e);
  }
  return out;
}

double ball_volume(std::size_t dim, double radius) {
  const double d = static_cast<double>(dim);
  return std::exp(0.5 * d * std::log(std::numbers::pi) - log_gamma(0.5 * d + 1.0) +
                  d * std::log(radius));
}

Matrix uniform_ball_draws(std::span<const double> center, double radius, std::size_t n, Rng& rng) {
  const std::size_t d = center.size();
  Matrix out(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    // Gaussian direction, radius r * U^(1/D).
    auto point = out.row(i);
    double norm = 0.0;
    for (double& v : point) {
      v = rng.gaussian();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    const double rho = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    for (std::size_t j = 0; j < d; ++j) point[j] = center[j] + point[j] / norm * rho;
  }
  return out;
}

namespace {

void check_mc_args(double radius, std::size_t n_draws) {
  if (!(radius > 0.0)) throw DomainError("mc_count_estimate: radius must be positive");
  if (n_draws < 100) throw DomainError("mc_count_estimate: need at least 100 draws");
}

}  // namespace

double mc_count_estimate(const PointLogDensity& log_density, std::span<const double> x,
                         double radius, std::size_t n_draws, Rng& rng, double class_count) {
  check_mc_args(radius, n_draws);
  if (class_count == 0.0) return 0.0;
  const Matrix draws = uniform_ball_draws(x, radius, n_draws, rng);
  double sum = 0.0;
  for (std::size_t i = 0; i < n_draws; ++i) sum += std::exp(log_density(draws.row(i)));
  return class_count * ball_volume(x.size(), radius) * sum / static_cast<double>(n_draws);
}

PseudoCounts mc_count_estimates(const BatchLogDensity& log_density, std::span<const double> x,
                                double radius, std::size_t n_draws, Rng& rng,
                                std::span<const double> class_counts) {
  check_mc_args(radius, n_draws);
  const Matrix draws = uniform_ball_draws(x, radius, n_draws, rng);
  const Matrix lp = log_density(draws);
  if (lp.rows() != n_draws || lp.cols() != class_counts.size()) {
    throw ShapeError("mc_count_estimates: density returned " + lp.shape_string());
  }
  const double vol = ball_volume(x.size(), radius);
  PseudoCounts out{std::vector<double>(class_counts.size(), 0.0), Volume::from_value(vol),
                   CountMode::monte_carlo};
  for (std::size_t k = 0; k < class_counts.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n_draws; ++i) sum += std::exp(lp(i, k));
    out.counts[k] = class_counts[k] * vol * sum / static_cast<double>(n_draws);
  }
  return out;
}

}  // namespace cccpde::bayes
