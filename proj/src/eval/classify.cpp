#include <cmath>
#include <limits>
#include <stdexcept>

#include "cccpde/errors.hpp"
#include "cccpde/eval.hpp"

namespace cccpde::eval {

RatioTestResult ratio_test_classify(std::span<const double> log_densities,
                                    std::span<const double> log_priors) {
  if (log_densities.size() != log_priors.size() || log_densities.size() < 2) {
    throw ShapeError("ratio_test_classify: need matching densities and priors for >= 2 classes");
  }
  RatioTestResult r;
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t k = 0; k < log_densities.size(); ++k) {
    if (std::isnan(log_densities[k])) throw NumericError("ratio_test_classify: NaN log-density");
    const double v = log_densities[k] + log_priors[k];
    if (v == -std::numeric_limits<double>::infinity()) continue;
    if (!any || v > best) {
      best = v;
      r.predicted = k;
      any = true;
    }
  }
  if (!any) {
    r.outcome = RatioOutcome::no_support;
    r.score = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.score = log_densities.size() == 2
                ? (log_densities[1] + log_priors[1]) - (log_densities[0] + log_priors[0])
                : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::vector<double> log_priors(std::span<const double> priors) {
  std::vector<double> out;
  out.reserve(priors.size());
  for (double p : priors) out.push_back(std::log(p));
  return out;
}

}  // namespace cccpde::eval
