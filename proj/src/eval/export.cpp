#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cccpde/eval.hpp"

namespace cccpde::eval {

namespace {

using data::format_double;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_roc_csv(const std::filesystem::path& path, std::span<const ScorerComparison> scorers,
                   bool retained) {
  std::ostringstream out;
  out << "scorer,fpr,tpr,threshold\n";
  for (const auto& s : scorers) {
    const RocCurve& curve = retained ? s.retained : s.full;
    for (const auto& p : curve.points) {
      out << s.name << ',' << format_double(p.fpr) << ',' << format_double(p.tpr) << ','
          << format_double(p.threshold) << '\n';
    }
  }
  write_text(path, out.str());
}

void write_auc_summary_csv(const std::filesystem::path& path, const FilteredComparison& cmp,
                           std::size_t n_full) {
  std::ostringstream out;
  out << "scorer,auc_full,auc_retained,n_full,n_retained\n";
  for (const auto& s : cmp.scorers) {
    out << s.name << ',' << format_double(s.full.auc) << ',' << format_double(s.retained.auc)
        << ',' << n_full << ',' << cmp.partition.retained.size() << '\n';
  }
  write_text(path, out.str());
}

void write_reports_csv(const std::filesystem::path& path, std::span<const ReportRow> rows) {
  std::ostringstream out;
  out << "index,label,score_ffnn,score_sigmoid,logp_class0,logp_class1,post_mean,ci_lo,ci_hi,"
         "abstain\n";
  for (const auto& row : rows) {
    const bayes::UncertaintyReport& r = *row.report;
    out << row.index << ',' << row.label << ','
        << (row.score_ffnn ? format_double(*row.score_ffnn) : std::string("nan")) << ','
        << format_double(row.score_sigmoid) << ',' << format_double(r.log_densities[0]) << ','
        << format_double(r.log_densities[1]) << ',' << format_double(r.point_estimate) << ','
        << format_double(r.interval.lo) << ',' << format_double(r.interval.hi) << ','
        << (r.abstain ? 1 : 0) << '\n';
  }
  write_text(path, out.str());
}

void write_density_grid_csv(const std::filesystem::path& path, const DensityGrid& grid) {
  std::ostringstream out;
  out << "x,y";
  for (std::size_t k = 0; k < grid.log_density.cols(); ++k) out << ",logp_" << k;
  out << ",logp_total\n";
  const std::size_t res = grid.xs.size();
  for (std::size_t i = 0; i < grid.points(); ++i) {
    out << format_double(grid.xs[i % res]) << ',' << format_double(grid.ys[i / res]);
    for (double v : grid.log_density.row(i)) out << ',' << format_double(v);
    out << ',' << format_double(grid.log_total[i]) << '\n';
  }
  write_text(path, out.str());
}

void write_table_csv(const std::filesystem::path& path, std::span<const std::string> columns,
                     const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw std::invalid_argument("write_table_csv: ragged row");
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  write_text(path, out.str());
}

}  // namespace cccpde::eval
