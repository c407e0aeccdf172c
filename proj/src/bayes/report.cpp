#include <string>

#include "cccpde/bayes.hpp"

namespace cccpde::bayes {

UncertaintyReport posterior_report(std::span<const double> log_densities,
                                   std::span<const double> class_counts, Volume volume,
                                   const ReportSettings& settings) {
  if (log_densities.size() != 2) {
    throw UnsupportedModeError(
        "posterior_report: " + std::to_string(log_densities.size()) +
        " classes given; only the binary Beta-Bernoulli posterior is implemented (a multiclass "
        "report would need Dirichlet-Multinomial credible regions)");
  }
  UncertaintyReport r = report_from_counts(pseudo_counts(log_densities, class_counts, volume), settings);
  r.log_densities.assign(log_densities.begin(), log_densities.end());
  return r;
}

UncertaintyReport report_from_counts(PseudoCounts counts, const ReportSettings& settings) {
  if (counts.counts.size() != 2) {
    throw UnsupportedModeError("report_from_counts: " + std::to_string(counts.counts.size()) +
                               " classes given; a multiclass report would need a Dirichlet "
                               "posterior");
  }
  UncertaintyReport r;
  r.counts = std::move(counts);
  r.posterior = beta_update(settings.prior, r.counts.counts[1], r.counts.counts[0]);
  r.interval = credible_interval(r.posterior, settings.mass);
  r.point_estimate = r.posterior.mean();
  r.abstain = r.interval.range() > settings.threshold;
  return r;
}

}  // namespace cccpde::bayes
