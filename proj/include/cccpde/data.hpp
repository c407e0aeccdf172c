#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cccpde/matrix.hpp"

namespace cccpde::data {

using Label = std::size_t;

/// Labeled feature rows. `components` (optional) records which generator
/// component produced each row; it is empty for data read from CSV.
struct Dataset {
  Matrix features;
  std::vector<Label> labels;
  std::string name;
  std::vector<std::size_t> components;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }
  /// max label + 1 (0 for an empty set).
  std::size_t num_classes() const;
  /// Labels in [0, num_classes()) with no rows.
  std::vector<Label> empty_classes() const;
  std::vector<std::size_t> class_counts(std::size_t num_classes) const;

  /// Throws std::invalid_argument if labels and rows disagree.
  void validate() const;
};

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows);

// ---------------------------------------------------------------------------
// Gaussian mixture generation

struct MixtureComponent {
  Label label = 0;
  std::vector<double> center;
  /// Either D entries (diagonal variances) or D*D entries (row-major covariance).
  std::vector<double> covariance;
  std::size_t count = 0;
  /// Excluded from training splits by the `openset` preset.
  bool held_out = false;
};

/// Draws `count` rows per component. Non-positive-definite covariances throw
/// std::invalid_argument.
Dataset gen_mixture(std::span<const MixtureComponent> components, std::uint64_t seed,
                    std::string name = "mixture");

struct TrainTestSets {
  Dataset train;
  Dataset test;
};

/// Preset names: separable, overlap, composite, openset.
std::vector<std::string> preset_names();

/// Components for a preset with roughly `total` rows spread over its classes.
/// For `openset`, the held-out component is included and flagged.
std::vector<MixtureComponent> preset_components(std::string_view preset, std::size_t total);

/// Independent train and test draws from a preset. The `openset` training set
/// never contains held-out rows; its test set labels them with
/// label == number of training classes.
TrainTestSets make_preset(std::string_view preset, std::size_t n_train, std::size_t n_test,
                          std::uint64_t seed);

/// 1-D heteroscedastic regression sample: x ~ U[-3, 3],
/// y = sin(x) + N(0, (0.1 + 0.1 |x|)^2).
struct RegressionSample {
  std::vector<double> x;
  std::vector<double> y;
};
RegressionSample gen_regression(std::size_t n, std::uint64_t seed);
double regression_mean(double x);
double regression_stddev(double x);

// ---------------------------------------------------------------------------
// CSV: header `label,f0,f1,...`, one row per sample.

class CsvError : public std::runtime_error {
 public:
  enum class Kind { empty_file, missing_header, ragged_row, non_numeric, io };
  CsvError(Kind kind, std::size_t line, const std::string& message);
  Kind kind() const { return kind_; }
  /// 1-based line number (0 when not tied to a line).
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& ds, const std::filesystem::path& path);

/// Shortest round-tripping decimal representation.
std::string format_double(double v);

// ---------------------------------------------------------------------------

class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> stddev);

  /// Degenerate (zero-variance) dimensions get stddev 1 and are listed in
  /// degenerate_dims().
  static Standardizer fit(const Matrix& train);

  Matrix apply(const Matrix& x) const;
  Matrix invert(const Matrix& z) const;
  Dataset apply(const Dataset& ds) const;

  std::size_t dim() const { return mean_.size(); }
  bool is_identity() const { return mean_.empty(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }
  const std::vector<std::size_t>& degenerate_dims() const { return degenerate_; }
  /// sum_j ln(stddev_j): the log-volume change of the map.
  double log_scale() const;

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
  std::vector<std::size_t> degenerate_;
};

/// Population standard deviation per column.
std::vector<double> column_stddev(const Matrix& x);

/// Seeded random split; round(fraction * n) rows go to train.
TrainTestSets split(const Dataset& ds, double fraction, std::uint64_t seed);

}  // namespace cccpde::data
