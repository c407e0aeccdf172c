#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cccpde/errors.hpp"
#include "cccpde/eval.hpp"

namespace cccpde::eval {

namespace {

constexpr std::size_t kChunkRows = 256;

std::vector<std::size_t> chunk_rows(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> rows(end - begin);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;
  return rows;
}

}  // namespace

model::CccpDeOutput evaluate_batch_serial(const model::CccpDeModel& model, const Matrix& x) {
  return model.forward(x);
}

model::CccpDeOutput evaluate_batch(const model::CccpDeModel& model, const Matrix& x, int threads) {
  if (x.cols() != model.dim()) {
    throw ShapeError("evaluate_batch: input " + x.shape_string() + " for dimension " +
                     std::to_string(model.dim()));
  }
  if (threads <= 1 || x.rows() <= kChunkRows) return model.forward(x);
  const std::size_t n = x.rows();
  const std::size_t chunks = (n + kChunkRows - 1) / kChunkRows;
  model::CccpDeOutput out{Matrix(n, model.num_classes()), std::vector<double>(n)};
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = c * kChunkRows;
    const std::size_t end = std::min(n, begin + kChunkRows);
    const auto rows = chunk_rows(begin, end);
    const model::CccpDeOutput part = model.forward(select_rows(x, rows));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto src = part.log_density.row(i);
      std::copy(src.begin(), src.end(), out.log_density.row(begin + i).begin());
      out.disc_score[begin + i] = part.disc_score[i];
    }
  }
  return out;
}

std::vector<double> predict_batch(const model::FfnnModel& model, const Matrix& x, int threads) {
  if (x.cols() != model.config().dim) {
    throw ShapeError("predict_batch: input " + x.shape_string() + " for dimension " +
                     std::to_string(model.config().dim));
  }
  if (threads <= 1 || x.rows() <= kChunkRows) return model.predict(x);
  const std::size_t n = x.rows();
  const std::size_t chunks = (n + kChunkRows - 1) / kChunkRows;
  std::vector<double> out(n);
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = c * kChunkRows;
    const std::size_t end = std::min(n, begin + kChunkRows);
    const std::vector<double> part = model.predict(select_rows(x, chunk_rows(begin, end)));
    std::copy(part.begin(), part.end(), out.begin() + static_cast<std::ptrdiff_t>(begin));
  }
  return out;
}

std::vector<bayes::UncertaintyReport> make_reports(const model::CccpDeOutput& output,
                                                   std::span<const double> class_counts,
                                                   bayes::Volume volume,
                                                   const bayes::ReportSettings& settings) {
  std::vector<bayes::UncertaintyReport> out;
  out.reserve(output.log_density.rows());
  for (std::size_t i = 0; i < output.log_density.rows(); ++i) {
    out.push_back(bayes::posterior_report(output.log_density.row(i), class_counts, volume, settings));
  }
  return out;
}

std::vector<double> in_set_score(const model::CccpDeOutput& output) {
  std::vector<double> out(output.log_density.rows(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < out.size(); ++i)
    for (double v : output.log_density.row(i)) out[i] = std::max(out[i], v);
  return out;
}

std::vector<double> in_set_score(const model::CccpDeModel& model, const Matrix& x, int threads) {
  return in_set_score(evaluate_batch(model, x, threads));
}

double DensityGrid::total_mass() const {
  double s = 0.0;
  for (double v : log_total) s += std::exp(v);
  return s * cell_area;
}

double DensityGrid::class_mass(std::size_t k) const {
  double s = 0.0;
  for (std::size_t i = 0; i < log_density.rows(); ++i) s += std::exp(log_density(i, k));
  return s * cell_area;
}

DensityGrid density_grid(const model::CccpDeModel& model, const GridBounds& bounds,
                         std::size_t resolution, int threads) {
  if (model.dim() != 2) throw std::invalid_argument("density_grid: model dimension must be 2");
  if (resolution < 2) throw std::invalid_argument("density_grid: resolution must be >= 2");
  if (!(bounds.x_max > bounds.x_min) || !(bounds.y_max > bounds.y_min)) {
    throw std::invalid_argument("density_grid: empty bounds");
  }
  DensityGrid g;
  const double dx = (bounds.x_max - bounds.x_min) / static_cast<double>(resolution - 1);
  const double dy = (bounds.y_max - bounds.y_min) / static_cast<double>(resolution - 1);
  for (std::size_t i = 0; i < resolution; ++i) {
    g.xs.push_back(bounds.x_min + dx * static_cast<double>(i));
    g.ys.push_back(bounds.y_min + dy * static_cast<double>(i));
  }
  g.cell_area = dx * dy;
  Matrix points(resolution * resolution, 2);
  for (std::size_t r = 0; r < resolution; ++r)
    for (std::size_t c = 0; c < resolution; ++c) {
      points(r * resolution + c, 0) = g.xs[c];
      points(r * resolution + c, 1) = g.ys[r];
    }
  g.log_density = evaluate_batch(model, points, threads).log_density;
  const std::vector<double> lp = log_priors(model.class_priors());
  g.log_total.resize(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lp.size(); ++k) peak = std::max(peak, g.log_density(i, k) + lp[k]);
    double sum = 0.0;
    for (std::size_t k = 0; k < lp.size(); ++k) sum += std::exp(g.log_density(i, k) + lp[k] - peak);
    g.log_total[i] = peak + std::log(sum);
  }
  return g;
}

}  // namespace cccpde::eval
