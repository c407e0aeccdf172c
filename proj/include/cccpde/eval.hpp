#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cccpde/bayes.hpp"
#include "cccpde/data.hpp"
#include "cccpde/model.hpp"

namespace cccpde::eval {

using data::Label;

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

/// Threshold sweep from (0,0) at +inf down to (1,1) at the lowest score.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// ROC over unique score thresholds. AUC is the trapezoid area, which with
/// tied scores grouped equals the Mann-Whitney statistic (ties count 1/2);
/// it is computed from integer counts. Throws std::invalid_argument when
/// only one class is present, labels are not 0/1, or a score is NaN.
RocCurve roc_auc(std::span<const double> scores, std::span<const Label> labels);

// ---------------------------------------------------------------------------

enum class RatioOutcome { classified, no_support };

struct RatioTestResult {
  RatioOutcome outcome = RatioOutcome::classified;
  std::size_t predicted = 0;
  /// (log p_1 + log pi_1) - (log p_0 + log pi_0) for binary problems, NaN otherwise.
  double score = 0.0;
};

/// argmax_k log p_k + log pi_k, ties to the lower index. All -inf densities
/// give RatioOutcome::no_support.
RatioTestResult ratio_test_classify(std::span<const double> log_densities,
                                    std::span<const double> log_priors);

std::vector<double> log_priors(std::span<const double> priors);

// ---------------------------------------------------------------------------

struct Partition {
  std::vector<std::size_t> retained;
  std::vector<std::size_t> rejected;
};

/// Rejects samples whose credible-interval range exceeds `threshold`.
Partition filter_by_uncertainty(std::span<const bayes::UncertaintyReport> reports,
                                double threshold);

struct ScorerSeries {
  std::string name;
  std::vector<double> scores;
};

struct ScorerComparison {
  std::string name;
  RocCurve full;
  RocCurve retained;
};

struct FilteredComparison {
  Partition partition;
  std::vector<ScorerComparison> scorers;
};

/// Applies the single retained set implied by `reports` to every scorer. When
/// the retained set lacks one of the classes its curve is empty with NaN AUC.
FilteredComparison filtered_roc_comparison(std::span<const Label> labels,
                                           std::span<const ScorerSeries> scorers,
                                           std::span<const bayes::UncertaintyReport> reports,
                                           double threshold);

/// AUC(retained) - AUC(full) after rejecting `n_reject` uniformly random samples.
double random_rejection_gain(std::span<const double> scores, std::span<const Label> labels,
                             std::size_t n_reject, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Batched inference. The parallel variants split rows into fixed-size chunks
// evaluated under OpenMP; results are identical to the serial variants.

model::CccpDeOutput evaluate_batch(const model::CccpDeModel& model, const Matrix& x, int threads);
model::CccpDeOutput evaluate_batch_serial(const model::CccpDeModel& model, const Matrix& x);
std::vector<double> predict_batch(const model::FfnnModel& model, const Matrix& x, int threads);

/// One report per row of `output`.
std::vector<bayes::UncertaintyReport> make_reports(const model::CccpDeOutput& output,
                                                   std::span<const double> class_counts,
                                                   bayes::Volume volume,
                                                   const bayes::ReportSettings& settings);

/// max_k log p_k(x) per row.
std::vector<double> in_set_score(const model::CccpDeModel& model, const Matrix& x, int threads = 1);
std::vector<double> in_set_score(const model::CccpDeOutput& output);

struct GridBounds {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;
};

/// Row-major (y outer, x inner) grid of per-class and prior-weighted total
/// log-densities at resolution x resolution points spanning the bounds.
struct DensityGrid {
  std::vector<double> xs;
  std::vector<double> ys;
  Matrix log_density;              // points x num_classes
  std::vector<double> log_total;   // log sum_k pi_k p_k
  double cell_area = 0.0;

  std::size_t points() const { return log_total.size(); }
  /// sum over points of exp(log_total) * cell_area.
  double total_mass() const;
  double class_mass(std::size_t k) const;
};

DensityGrid density_grid(const model::CccpDeModel& model, const GridBounds& bounds,
                         std::size_t resolution, int threads = 1);

// ---------------------------------------------------------------------------
// CSV exports. Numbers use the shortest round-tripping decimal form.

/// scorer,fpr,tpr,threshold (full curves, or retained-set curves).
void write_roc_csv(const std::filesystem::path& path, std::span<const ScorerComparison> scorers,
                   bool retained);

/// scorer,auc_full,auc_retained,n_full,n_retained
void write_auc_summary_csv(const std::filesystem::path& path, const FilteredComparison& cmp,
                           std::size_t n_full);

struct ReportRow {
  std::size_t index = 0;
  Label label = 0;
  std::optional<double> score_ffnn;
  double score_sigmoid = 0.0;
  const bayes::UncertaintyReport* report = nullptr;
};

/// index,label,score_ffnn,score_sigmoid,logp_class0,logp_class1,post_mean,ci_lo,ci_hi,abstain
void write_reports_csv(const std::filesystem::path& path, std::span<const ReportRow> rows);

/// x,y,logp_0,...,logp_{M-1},logp_total
void write_density_grid_csv(const std::filesystem::path& path, const DensityGrid& grid);

/// Header row then one line per entry; `columns` names the header.
void write_table_csv(const std::filesystem::path& path, std::span<const std::string> columns,
                     const std::vector<std::vector<double>>& rows);

}  // namespace cccpde::eval
