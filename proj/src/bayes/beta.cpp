#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cccpde/bayes.hpp"
#include "cccpde/errors.hpp"
#include "cccpde/special.hpp"

namespace cccpde::bayes {

BetaPosterior::BetaPosterior(double a_, double b_) : a(a_), b(b_) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("BetaPosterior: shape parameters must be positive and finite");
  }
}

BetaPosterior base_rate_prior(double positive_rate, double concentration) {
  if (!(positive_rate > 0.0 && positive_rate < 1.0) || !(concentration > 0.0)) {
    throw std::invalid_argument("base_rate_prior: need 0 < rate < 1 and concentration > 0");
  }
  return {concentration * positive_rate, concentration * (1.0 - positive_rate)};
}

BetaPosterior beta_update(const BetaPosterior& prior, double positive, double negative) {
  if (!(positive >= 0.0) || !(negative >= 0.0)) {
    throw std::invalid_argument("beta_update: counts must be non-negative");
  }
  return {prior.a + positive, prior.b + negative};
}

namespace {

constexpr int kMaxIterations = 200000;
constexpr double kTiny = 1e-300;
constexpr double kTolerance = 1e-16;

// Continued fraction for I_x(a,b) (modified Lentz).
double continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double md = static_cast<double>(m);
    const double m2 = 2.0 * md;
    double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kTolerance) return h;
  }
  throw NumericError("beta_cdf: continued fraction did not converge");
}

constexpr double kNormalApproxTotal = 1e9;

// z with P(Z > z) = p, by bisection on erfc.
double normal_upper_quantile(double p) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(mid / std::sqrt(2.0)) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double beta_cdf(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta_cdf: shape parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("beta_cdf: x must lie in [0, 1], got " + std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * continued_fraction(x, a, b) / a;
  return 1.0 - front * continued_fraction(1.0 - x, b, a) / b;
}

double beta_quantile(double p, double a, double b) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("beta_quantile: p must lie in [0, 1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (beta_cdf(mid, a, b) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

CredibleInterval credible_interval(const BetaPosterior& post, double mass) {
  if (!(mass > 0.0 && mass < 1.0)) throw DomainError("credible_interval: mass must be in (0, 1)");
  const double tail = 0.5 * (1.0 - mass);
  const double total = post.a + post.b;
  if (total > kNormalApproxTotal) {
    // The continued fraction needs O(sqrt(a + b)) terms; far past any count a
    // desk-scale model produces, the posterior is Gaussian to within 1e-8.
    const double mean = post.mean();
    const double sd = std::sqrt(post.a * post.b / (total * total * (total + 1.0)));
    const double z = normal_upper_quantile(tail);
    return {std::max(0.0, mean - z * sd), std::min(1.0, mean + z * sd)};
  }
  return {beta_quantile(tail, post.a, post.b), beta_quantile(1.0 - tail, post.a, post.b)};
}

}  // namespace cccpde::bayes
