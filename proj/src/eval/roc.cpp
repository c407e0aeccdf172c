#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cccpde/errors.hpp"
#include "cccpde/eval.hpp"

namespace cccpde::eval {

RocCurve roc_auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("roc_auc: " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(labels.size()) + " labels");
  }
  std::uint64_t positives = 0, negatives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) throw std::invalid_argument("roc_auc: labels must be 0 or 1");
    if (std::isnan(scores[i])) throw std::invalid_argument("roc_auc: NaN score");
    labels[i] == 1 ? ++positives : ++negatives;
  }
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("roc_auc: both classes must be present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::uint64_t tp = 0, fp = 0;
  // Twice the Mann-Whitney U: each tie group contributes fp_g * (2 tp_before + tp_g).
  std::uint64_t twice_u = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    std::uint64_t group_tp = 0, group_fp = 0;
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      labels[order[i]] == 1 ? ++group_tp : ++group_fp;
    }
    twice_u += group_fp * (2 * tp + group_tp);
    tp += group_tp;
    fp += group_fp;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives), s});
  }
  curve.auc = static_cast<double>(twice_u) /
              (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
  return curve;
}

Partition filter_by_uncertainty(std::span<const bayes::UncertaintyReport> reports,
                                double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("filter_by_uncertainty: threshold must be > 0");
  Partition p;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    (reports[i].interval.range() > threshold ? p.rejected : p.retained).push_back(i);
  }
  return p;
}

namespace {

template <typename T>
std::vector<T> gather(std::span<const T> values, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(values[r]);
  return out;
}

}  // namespace

FilteredComparison filtered_roc_comparison(std::span<const Label> labels,
                                           std::span<const ScorerSeries> scorers,
                                           std::span<const bayes::UncertaintyReport> reports,
                                           double threshold) {
  if (reports.size() != labels.size()) {
    throw ShapeError("filtered_roc_comparison: " + std::to_string(reports.size()) +
                     " reports for " + std::to_string(labels.size()) + " labels");
  }
  for (const auto& s : scorers) {
    if (s.scores.size() != labels.size()) {
      throw ShapeError("filtered_roc_comparison: scorer '" + s.name + "' has " +
                       std::to_string(s.scores.size()) + " scores for " +
                       std::to_string(labels.size()) + " labels");
    }
  }
  FilteredComparison out;
  out.partition = filter_by_uncertainty(reports, threshold);
  const std::vector<Label> kept_labels = gather(labels, std::span<const std::size_t>(out.partition.retained));
  const bool both_present = std::count(kept_labels.begin(), kept_labels.end(), Label{1}) > 0 &&
                            std::count(kept_labels.begin(), kept_labels.end(), Label{0}) > 0;
  for (const auto& s : scorers) {
    const std::vector<double> kept = gather(std::span<const double>(s.scores),
                                            std::span<const std::size_t>(out.partition.retained));
    RocCurve retained{{}, std::numeric_limits<double>::quiet_NaN()};
    if (both_present) retained = roc_auc(kept, kept_labels);
    out.scorers.push_back({s.name, roc_auc(s.scores, labels), retained});
  }
  return out;
}

double random_rejection_gain(std::span<const double> scores, std::span<const Label> labels,
                             std::size_t n_reject, std::uint64_t seed) {
  if (n_reject >= scores.size()) throw std::invalid_argument("random_rejection_gain: rejects everything");
  Rng rng = Rng::derive(seed, "random-rejection");
  std::vector<std::size_t> order = random_permutation(scores.size(), rng);
  std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(n_reject), order.end());
  std::sort(kept.begin(), kept.end());
  const auto kept_scores = gather(scores, std::span<const std::size_t>(kept));
  const auto kept_labels = gather(labels, std::span<const std::size_t>(kept));
  return roc_auc(kept_scores, kept_labels).auc - roc_auc(scores, labels).auc;
}

}  // namespace cccpde::eval
