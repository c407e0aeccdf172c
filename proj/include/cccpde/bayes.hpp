#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cccpde/matrix.hpp"
#include "cccpde/rng.hpp"

namespace cccpde::bayes {

/// Beta(a, b) over the per-sample positive-class probability.
struct BetaPosterior {
  double a = 1.0;
  double b = 1.0;

  /// Throws std::invalid_argument unless a > 0 and b > 0.
  BetaPosterior(double a_ = 1.0, double b_ = 1.0);
  double mean() const { return a / (a + b); }
  bool operator==(const BetaPosterior&) const = default;
};

/// Beta(kappa * pi1, kappa * (1 - pi1)): a base-rate prior with concentration kappa.
BetaPosterior base_rate_prior(double positive_rate, double concentration);

/// (a + positive, b + negative). Negative counts throw std::invalid_argument.
BetaPosterior beta_update(const BetaPosterior& prior, double positive, double negative);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction, using
/// I_x(a,b) = 1 - I_{1-x}(b,a) when x > (a+1)/(a+b+2). Throws DomainError for
/// x outside [0, 1] or non-positive shapes.
double beta_cdf(double x, double a, double b);

/// Inverse of beta_cdf by bisection.
double beta_quantile(double p, double a, double b);

struct CredibleInterval {
  double lo = 0.0;
  double hi = 1.0;
  double range() const { return hi - lo; }
};

/// Equal-tailed interval holding `mass` of the posterior.
CredibleInterval credible_interval(const BetaPosterior& post, double mass = 0.95);

// ---------------------------------------------------------------------------

/// Neighborhood volume carried in log space so high-dimensional products
/// do not underflow.
class Volume {
 public:
  static Volume from_value(double v);
  static Volume from_log(double log_v);
  /// prod_j (fraction * stddev_j).
  static Volume from_stddev(std::span<const double> stddev, double fraction = 0.05);
  double log_value() const { return log_v_; }
  double value() const;

 private:
  explicit Volume(double log_v) : log_v_(log_v) {}
  double log_v_;
};

enum class CountMode { pointwise, monte_carlo };

struct PseudoCounts {
  std::vector<double> counts;
  Volume volume = Volume::from_value(1.0);
  CountMode mode = CountMode::pointwise;
};

/// Exponents below this clamp the count to zero.
inline constexpr double kCountUnderflowLog = -700.0;

/// c_k = V * N_k * exp(log p_k(x)).
PseudoCounts pseudo_counts(std::span<const double> log_densities,
                           std::span<const double> class_counts, Volume volume);

/// log-density of one class head at a single D-dimensional point.
using PointLogDensity = std::function<double(std::span<const double>)>;

/// Volume of the D-ball of radius r.
double ball_volume(std::size_t dim, double radius);

/// n points uniform in the ball of radius r around `center`.
Matrix uniform_ball_draws(std::span<const double> center, double radius, std::size_t n, Rng& rng);

/// N_k * Vol(B_r) * mean_j exp(log p(u_j)) with u_j uniform in B_r(x).
double mc_count_estimate(const PointLogDensity& log_density, std::span<const double> x,
                         double radius, std::size_t n_draws, Rng& rng, double class_count);

/// Maps n x D points to n x M per-class log-densities.
using BatchLogDensity = std::function<Matrix(const Matrix&)>;

/// All classes at once from one shared set of draws; counts carry the ball volume.
PseudoCounts mc_count_estimates(const BatchLogDensity& log_density, std::span<const double> x,
                                double radius, std::size_t n_draws, Rng& rng,
                                std::span<const double> class_counts);

// ---------------------------------------------------------------------------

class UnsupportedModeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ReportSettings {
  BetaPosterior prior{1.0, 1.0};
  double mass = 0.95;
  double threshold = 0.1;
};

struct UncertaintyReport {
  std::vector<double> log_densities;
  PseudoCounts counts;
  BetaPosterior posterior;
  CredibleInterval interval;
  double point_estimate = 0.5;
  bool abstain = false;
};

/// Binary posterior: class 1 counts update a, class 0 counts update b. More
/// than two classes would need a Dirichlet posterior and is rejected.
UncertaintyReport posterior_report(std::span<const double> log_densities,
                                   std::span<const double> class_counts, Volume volume,
                                   const ReportSettings& settings = {});

/// Same report from already computed counts (e.g. Monte Carlo estimates).
UncertaintyReport report_from_counts(PseudoCounts counts, const ReportSettings& settings = {});

}  // namespace cccpde::bayes
