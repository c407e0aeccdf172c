#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "cccpde/bayes.hpp"
#include "cccpde/cli.hpp"
#include "cccpde/data.hpp"
#include "cccpde/eval.hpp"
#include "cccpde/model.hpp"
#include "cccpde/special.hpp"

namespace cccpde::cli {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Options per subcommand

struct GenDataOptions {
  std::string preset;
  fs::path out;
  std::uint64_t seed = 0;
  std::size_t n_train = 4000;
  std::size_t n_test = 4000;
};

struct TrainOptions {
  std::string model;
  fs::path data;
  fs::path out;
  std::uint64_t seed = 0;
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  double nll_weight = 1.0;
  double bce_weight = 1.0;
  std::size_t base_depth = 3;
  std::size_t head_depth = 1;
  std::size_t hidden = 64;
  std::size_t disc_width = 64;
  std::size_t disc_blocks = 3;
  std::size_t ffnn_width = 64;
  std::size_t ffnn_blocks = 4;
  double dropout = 0.05;
  bool standardize = true;
  bool zero_init = true;
};

struct EvalOptions {
  fs::path model;
  std::optional<fs::path> ffnn;
  fs::path data;
  fs::path out;
  std::uint64_t seed = 0;
  double threshold = 0.1;
  double mass = 0.95;
  double prior_a = 1.0;
  double prior_b = 1.0;
  std::optional<double> base_rate;
  double concentration = 2.0;
  std::optional<double> volume;
  double volume_fraction = 0.05;
  std::string count_mode = "pointwise";
  std::optional<double> mc_radius;
  std::size_t mc_draws = 200;
  int threads = 1;
};

struct SampleOptions {
  fs::path model;
  std::size_t cls = 0;
  std::size_t n = 10;
  std::uint64_t seed = 0;
  fs::path out;
};

struct GridOptions {
  fs::path model;
  std::vector<double> bounds = {-6.0, 6.0, -6.0, 6.0};
  std::size_t resolution = 100;
  int threads = 1;
  fs::path out;
};

struct GlmOptions {
  std::uint64_t seed = 0;
  fs::path out;
  std::size_t n = 2000;
  std::size_t grid = 201;
  std::size_t epochs = 400;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  std::size_t hidden = 64;
  std::size_t depth = 2;
};

// ---------------------------------------------------------------------------
// Output helpers

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::string quote_if_needed(const std::string& v) {
  if (v.find_first_of(" \t#=") == std::string::npos && !v.empty()) return v;
  return '"' + v + '"';
}

/// Every option of `sub` with its effective value, in declaration order, in
/// the same `key = value` format the --config reader accepts.
std::string resolved_config(const CLI::App& sub) {
  std::ostringstream out;
  out << "# cccpde " << sub.get_name() << "\n";
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& r = opt->reduced_results();
      for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
    } else {
      value = opt->get_default_str();
    }
    out << name << " = " << quote_if_needed(value) << "\n";
  }
  return out.str();
}

void write_key_values(const fs::path& path,
                      const std::vector<std::pair<std::string, double>>& rows) {
  std::ostringstream out;
  out << "metric,value\n";
  for (const auto& [k, v] : rows) out << k << ',' << data::format_double(v) << '\n';
  write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Commands

int cmd_gen_data(const GenDataOptions& o, const CLI::App& sub, std::ostream& out) {
  if (o.n_train == 0 || o.n_test == 0) throw UsageError("--n-train and --n-test must be >= 1");
  const data::TrainTestSets sets = data::make_preset(o.preset, o.n_train, o.n_test, o.seed);
  prepare_dir(o.out);
  data::save_csv(sets.train, o.out / "train.csv");
  data::save_csv(sets.test, o.out / "test.csv");
  write_file(o.out / "config.txt", resolved_config(sub));
  out << "wrote " << sets.train.size() << " train and " << sets.test.size() << " test rows to "
      << o.out.string() << "\n";
  return kExitOk;
}

void warn_empty_classes(const data::Dataset& ds, std::ostream& err) {
  for (data::Label k : ds.empty_classes()) {
    err << "warning: class " << k << " has no rows in " << ds.name << "\n";
  }
}

std::vector<std::vector<double>> trace_rows(const model::TrainReport& r) {
  std::vector<std::vector<double>> rows;
  for (const auto& e : r.trace) rows.push_back({static_cast<double>(e.epoch), e.loss, e.nll, e.bce});
  return rows;
}

int cmd_train(const TrainOptions& o, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  data::Dataset ds = data::load_csv(o.data);
  ds.name = o.data.filename().string();
  if (ds.size() == 0) throw std::runtime_error("training data " + o.data.string() + " has no rows");
  warn_empty_classes(ds, err);
  model::TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch_size;
  tc.learning_rate = o.lr;
  tc.seed = o.seed;
  tc.weights = {o.nll_weight, o.bce_weight};
  try {
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Rng init = Rng::derive(o.seed, "init");
  const data::Standardizer transform =
      o.standardize ? data::Standardizer::fit(ds.features) : data::Standardizer{};
  for (std::size_t j : transform.degenerate_dims()) {
    err << "warning: feature " << j << " is constant; left unscaled\n";
  }
  prepare_dir(o.out);
  model::TrainReport report;
  std::vector<std::pair<std::string, double>> summary;
  if (o.model == "ffnn") {
    if (ds.num_classes() > 2) throw std::runtime_error("ffnn needs binary labels (0/1)");
    model::FfnnModel m({ds.dim(), o.ffnn_width, o.ffnn_blocks, o.dropout}, init);
    m.set_input_transform(transform);
    report = model::train(m, ds, tc);
    model::save_model(m, o.out / "model.bin");
    summary.push_back({"final_loss", m.loss_value(ds.features, ds.labels)});
  } else {
    model::CccpDeConfig c;
    c.dim = ds.dim();
    c.num_classes = std::max<std::size_t>(2, ds.num_classes());
    c.base_depth = o.base_depth;
    c.head_depth = o.head_depth;
    c.coupling_hidden = o.hidden;
    c.disc_width = o.disc_width;
    c.disc_blocks = o.disc_blocks;
    c.dropout = o.dropout;
    c.zero_init_output = o.zero_init;
    if (c.num_classes > 2 && tc.weights.bce > 0.0) {
      err << "note: " << c.num_classes
          << " classes; the sigmoid head is binary, so its loss weight is set to 0\n";
      tc.weights.bce = 0.0;
    }
    model::CccpDeModel m(c, init);
    m.set_input_transform(transform);
    report = model::train(m, ds, tc);
    model::save_model(m, o.out / "model.bin");
    const model::JointLossValue v = m.loss_value(ds.features, ds.labels, tc.weights);
    summary.push_back({"final_loss", v.total});
    summary.push_back({"final_nll", v.nll});
    summary.push_back({"final_bce", v.bce});
    summary.push_back({"num_classes", static_cast<double>(c.num_classes)});
  }
  summary.push_back({"n_train", static_cast<double>(ds.size())});
  summary.push_back({"optimizer_steps", static_cast<double>(report.optimizer_steps)});
  const std::vector<std::string> cols = {"epoch", "loss", "nll", "bce"};
  eval::write_table_csv(o.out / "loss_trace.csv", cols, trace_rows(report));
  write_key_values(o.out / "summary.csv", summary);
  write_file(o.out / "config.txt", resolved_config(sub));
  out << "trained " << o.model << " for " << o.epochs << " epochs; final epoch loss "
      << data::format_double(report.trace.back().loss) << "; model at "
      << (o.out / "model.bin").string() << "\n";
  return kExitOk;
}

bayes::ReportSettings report_settings(const EvalOptions& o) {
  bayes::ReportSettings s;
  try {
    s.prior = o.base_rate ? bayes::base_rate_prior(*o.base_rate, o.concentration)
                          : bayes::BetaPosterior(o.prior_a, o.prior_b);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("prior: ") + e.what());
  }
  if (!(o.mass > 0.0 && o.mass < 1.0)) throw UsageError("--mass must be in (0, 1)");
  if (!(o.threshold > 0.0)) throw UsageError("--threshold must be positive");
  s.mass = o.mass;
  s.threshold = o.threshold;
  return s;
}

std::vector<bayes::UncertaintyReport> monte_carlo_reports(const model::CccpDeModel& m,
                                                          const Matrix& x, const EvalOptions& o,
                                                          bayes::Volume volume,
                                                          const bayes::ReportSettings& settings) {
  const std::size_t d = m.dim();
  // Default radius: the ball with the same volume as the pointwise neighborhood.
  const double radius =
      o.mc_radius ? *o.mc_radius
                  : std::exp((volume.log_value() - std::log(bayes::ball_volume(d, 1.0))) /
                             static_cast<double>(d));
  Rng rng = Rng::derive(o.seed, "sampling");
  const model::CccpDeOutput at_points = m.forward(x);
  std::vector<bayes::UncertaintyReport> reports;
  reports.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = bayes::report_from_counts(
        bayes::mc_count_estimates([&](const Matrix& pts) { return m.forward(pts).log_density; },
                                  x.row(i), radius, o.mc_draws, rng, m.class_counts()),
        settings);
    const auto lp = at_points.log_density.row(i);
    r.log_densities.assign(lp.begin(), lp.end());
    reports.push_back(std::move(r));
  }
  return reports;
}

int cmd_eval(const EvalOptions& o, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  if (o.threads < 1) throw UsageError("--threads must be >= 1");
  if (o.count_mode != "pointwise" && o.mc_draws < 100) throw UsageError("--mc-draws must be >= 100");
  const bayes::ReportSettings settings = report_settings(o);
  const model::CccpDeModel m = model::load_cccpde(o.model);
  std::optional<model::FfnnModel> ffnn;
  if (o.ffnn) ffnn.emplace(model::load_ffnn(*o.ffnn));
  const data::Dataset ds = data::load_csv(o.data);
  if (ds.dim() != m.dim()) {
    throw std::runtime_error("test data has " + std::to_string(ds.dim()) +
                             " features but the model expects " + std::to_string(m.dim()));
  }
  const std::size_t num_classes = m.num_classes();
  const bayes::Volume volume =
      o.volume ? bayes::Volume::from_value(*o.volume)
               : bayes::Volume::from_stddev(m.feature_stddev(), o.volume_fraction);

  prepare_dir(o.out);
  const model::CccpDeOutput output = eval::evaluate_batch(m, ds.features, o.threads);
  const auto lp = eval::log_priors(m.class_priors());
  const std::vector<double> in_set = eval::in_set_score(output);

  std::vector<std::pair<std::string, double>> summary = {
      {"n_test", static_cast<double>(ds.size())},
      {"log_volume", volume.log_value()},
      {"threshold", settings.threshold},
      {"mass", settings.mass},
      {"prior_a", settings.prior.a},
      {"prior_b", settings.prior.b},
  };

  // Ratio-test accuracy over rows whose label is a trained class.
  std::vector<double> ratio_scores(ds.size(), 0.0);
  std::size_t correct = 0, scored = 0, no_support = 0;
  std::vector<data::Label> predicted(ds.size(), 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const eval::RatioTestResult r = eval::ratio_test_classify(output.log_density.row(i), lp);
    predicted[i] = r.predicted;
    if (r.outcome == eval::RatioOutcome::no_support) {
      ++no_support;
    } else if (num_classes == 2) {
      ratio_scores[i] = r.score;
    }
    if (ds.labels[i] < num_classes) {
      ++scored;
      correct += r.outcome == eval::RatioOutcome::classified && r.predicted == ds.labels[i];
    }
  }
  summary.push_back({"ratio_accuracy", scored ? static_cast<double>(correct) / scored : 0.0});
  summary.push_back({"no_support", static_cast<double>(no_support)});

  // Rows labelled outside the trained classes are treated as out-of-set.
  std::vector<data::Label> in_set_labels(ds.size());
  std::size_t n_out = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    in_set_labels[i] = ds.labels[i] < num_classes ? 1 : 0;
    n_out += 1 - in_set_labels[i];
  }
  if (n_out > 0) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      rows.push_back({static_cast<double>(i), static_cast<double>(ds.labels[i]),
                      static_cast<double>(in_set_labels[i]), in_set[i]});
    }
    const std::vector<std::string> cols = {"index", "label", "in_set", "in_set_score"};
    eval::write_table_csv(o.out / "in_set.csv", cols, rows);
    if (n_out < ds.size()) {
      summary.push_back({"in_set_auc", eval::roc_auc(in_set, in_set_labels).auc});
    }
    summary.push_back({"n_out_of_set", static_cast<double>(n_out)});
  }

  if (num_classes != 2) {
    err << "note: " << num_classes
        << "-class model; posterior reports need the binary Beta posterior (a Dirichlet "
           "extension is not implemented), writing predictions only\n";
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      rows.push_back({static_cast<double>(i), static_cast<double>(ds.labels[i]),
                      static_cast<double>(predicted[i]), in_set[i]});
    }
    const std::vector<std::string> cols = {"index", "label", "predicted", "in_set_score"};
    eval::write_table_csv(o.out / "predictions.csv", cols, rows);
    write_key_values(o.out / "summary.csv", summary);
    write_file(o.out / "config.txt", resolved_config(sub));
    out << "evaluated " << ds.size() << " rows; outputs in " << o.out.string() << "\n";
    return kExitOk;
  }

  const std::vector<bayes::UncertaintyReport> reports =
      o.count_mode == "pointwise"
          ? eval::make_reports(output, m.class_counts(), volume, settings)
          : monte_carlo_reports(m, ds.features, o, volume, settings);
  std::vector<double> ffnn_scores;
  if (ffnn) ffnn_scores = eval::predict_batch(*ffnn, ds.features, o.threads);

  std::vector<eval::ReportRow> report_rows;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::optional<double> f;
    if (ffnn) f = ffnn_scores[i];
    report_rows.push_back({i, ds.labels[i], f, output.disc_score[i], &reports[i]});
  }
  eval::write_reports_csv(o.out / "reports.csv", report_rows);

  // Classification curves over the rows carrying a binary label.
  std::vector<std::size_t> binary_rows;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.labels[i] < 2) binary_rows.push_back(i);
  std::vector<data::Label> labels;
  std::vector<bayes::UncertaintyReport> kept_reports;
  std::vector<eval::ScorerSeries> scorers;
  if (ffnn) scorers.push_back({"ffnn", {}});
  scorers.push_back({"sigmoid", {}});
  scorers.push_back({"ratio", {}});
  for (std::size_t i : binary_rows) {
    labels.push_back(ds.labels[i]);
    kept_reports.push_back(reports[i]);
    std::size_t s = 0;
    if (ffnn) scorers[s++].scores.push_back(ffnn_scores[i]);
    scorers[s++].scores.push_back(output.disc_score[i]);
    scorers[s].scores.push_back(ratio_scores[i]);
  }
  const bool both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                    std::count(labels.begin(), labels.end(), 0) > 0;
  if (both) {
    const eval::FilteredComparison cmp =
        eval::filtered_roc_comparison(labels, scorers, kept_reports, settings.threshold);
    eval::write_roc_csv(o.out / "roc.csv", cmp.scorers, false);
    eval::write_roc_csv(o.out / "roc_filtered.csv", cmp.scorers, true);
    eval::write_auc_summary_csv(o.out / "auc.csv", cmp, labels.size());
    if (cmp.partition.retained.empty() || std::isnan(cmp.scorers.front().retained.auc)) {
      err << "note: the retained set does not contain both classes; retained AUC is nan\n";
    }
    summary.push_back({"n_scored", static_cast<double>(labels.size())});
    summary.push_back({"n_retained", static_cast<double>(cmp.partition.retained.size())});
    summary.push_back({"n_rejected", static_cast<double>(cmp.partition.rejected.size())});
  } else {
    err << "note: test labels do not contain both classes 0 and 1; ROC outputs skipped\n";
  }
  std::size_t abstained = 0;
  for (const auto& r : reports) abstained += r.abstain;
  summary.push_back({"abstained_all_rows", static_cast<double>(abstained)});
  write_key_values(o.out / "summary.csv", summary);
  write_file(o.out / "config.txt", resolved_config(sub));
  out << "evaluated " << ds.size() << " rows (" << abstained << " abstained); outputs in "
      << o.out.string() << "\n";
  return kExitOk;
}

int cmd_sample(const SampleOptions& o, const CLI::App& sub, std::ostream& out) {
  const model::CccpDeModel m = model::load_cccpde(o.model);
  if (o.cls >= m.num_classes()) {
    throw UsageError("--class " + std::to_string(o.cls) + " is out of range for a " +
                     std::to_string(m.num_classes()) + "-class model");
  }
  if (o.n == 0) throw UsageError("--n must be >= 1");
  Rng rng = Rng::derive(o.seed, "sampling");
  data::Dataset ds{m.sample(o.cls, o.n, rng), std::vector<data::Label>(o.n, o.cls), "samples", {}};
  prepare_dir(o.out);
  data::save_csv(ds, o.out / "samples.csv");
  write_file(o.out / "config.txt", resolved_config(sub));
  out << "wrote " << o.n << " samples of class " << o.cls << " to "
      << (o.out / "samples.csv").string() << "\n";
  return kExitOk;
}

int cmd_density_grid(const GridOptions& o, const CLI::App& sub, std::ostream& out) {
  if (o.threads < 1) throw UsageError("--threads must be >= 1");
  if (o.resolution < 2) throw UsageError("--resolution must be >= 2");
  const model::CccpDeModel m = model::load_cccpde(o.model);
  if (m.dim() != 2) {
    throw UsageError("density-grid needs a 2-D model; this model has " + std::to_string(m.dim()) +
                     " dimensions");
  }
  const eval::GridBounds b{o.bounds[0], o.bounds[1], o.bounds[2], o.bounds[3]};
  if (!(b.x_min < b.x_max && b.y_min < b.y_max)) throw UsageError("--bounds must be increasing");
  const eval::DensityGrid grid = eval::density_grid(m, b, o.resolution, o.threads);
  prepare_dir(o.out);
  eval::write_density_grid_csv(o.out / "density_grid.csv", grid);
  std::vector<std::pair<std::string, double>> summary = {{"points", static_cast<double>(grid.points())},
                                                         {"cell_area", grid.cell_area},
                                                         {"total_mass", grid.total_mass()}};
  for (std::size_t k = 0; k < m.num_classes(); ++k) {
    summary.push_back({"class_mass_" + std::to_string(k), grid.class_mass(k)});
  }
  write_key_values(o.out / "summary.csv", summary);
  write_file(o.out / "config.txt", resolved_config(sub));
  out << "wrote " << grid.points() << " grid points; mixture mass on grid "
      << data::format_double(grid.total_mass()) << "\n";
  return kExitOk;
}

int cmd_glm_demo(const GlmOptions& o, const CLI::App& sub, std::ostream& out) {
  if (o.n == 0 || o.grid < 2) throw UsageError("--n must be >= 1 and --grid >= 2");
  const data::RegressionSample train = data::gen_regression(o.n, Rng::derive(o.seed, "data").next_u64());
  model::GlmFitOptions fit;
  fit.model = {1, o.hidden, o.depth};
  fit.train.epochs = o.epochs;
  fit.train.batch_size = o.batch_size;
  fit.train.learning_rate = o.lr;
  fit.train.seed = o.seed;
  try {
    fit.train.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Matrix grid(o.grid, 1);
  for (std::size_t i = 0; i < o.grid; ++i) {
    grid(i, 0) = -3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(o.grid - 1);
  }
  const model::GlmPrediction pred =
      model::glm_fit_and_predict(Matrix::column_vector(train.x), train.y, fit, grid);
  Rng holdout = Rng::derive(o.seed, "sampling");
  std::vector<std::vector<double>> rows;
  std::size_t covered = 0;
  double sigma_true_sum = 0.0;
  for (std::size_t i = 0; i < o.grid; ++i) {
    const double x = grid(i, 0);
    const double sd = data::regression_stddev(x);
    const double y_obs = data::regression_mean(x) + sd * holdout.gaussian();
    covered += std::abs(y_obs - pred.mean[i]) <= 2.0 * pred.stddev[i];
    sigma_true_sum += sd;
    rows.push_back({x, pred.mean[i], pred.stddev[i], data::regression_mean(x), sd, y_obs});
  }
  std::vector<double> sorted = pred.stddev;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  prepare_dir(o.out);
  const std::vector<std::string> cols = {"x", "mu", "sigma", "y_true", "sigma_true", "y_obs"};
  eval::write_table_csv(o.out / "glm.csv", cols, rows);
  const double coverage = static_cast<double>(covered) / static_cast<double>(o.grid);
  write_key_values(o.out / "summary.csv",
                   {{"coverage_2sigma", coverage},
                    {"median_sigma_hat", median},
                    {"mean_sigma_true", sigma_true_sum / static_cast<double>(o.grid)}});
  write_file(o.out / "config.txt", resolved_config(sub));
  out << "glm demo: mu +- 2 sigma covers " << data::format_double(coverage)
      << " of held-out draws; outputs in " << o.out.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Wiring

template <typename T>
CLI::Option* opt(CLI::App* sub, const std::string& name, T& value, const std::string& help) {
  return sub->add_option(name, value, help)->capture_default_str();
}

/// Inserts the entries of any `--config FILE` right after the subcommand name
/// so that flags given on the command line, which come later, take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
  if (args.size() < 2) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[1]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::optional<std::string> file;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
  }
  if (!file) return args;
  std::vector<std::string> expanded(args.begin(), args.begin() + 2);
  for (const ConfigEntry& e : read_config_file(*file)) {
    const CLI::Option* o = sub->get_option_no_throw("--" + e.key);
    if (o == nullptr || e.key == "config" || e.key == "help") {
      throw UsageError(*file + ":" + std::to_string(e.line) + ": unknown key '" + e.key +
                       "' for " + sub->get_name());
    }
    expanded.push_back("--" + e.key);
    // Vector-valued keys are written comma separated.
    expanded.push_back(e.value);
  }
  expanded.insert(expanded.end(), args.begin() + 2, args.end());
  return expanded;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Class-conditional coupling density estimation with Beta-Binomial abstention."};
  app.name("cccpde");
  app.require_subcommand(1, 1);
  app.footer("Exit codes: 0 success, 1 runtime error, 2 usage error.");

  auto add_sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    s->add_option("--config", "Flat 'key = value' file; command-line flags override it")
        ->check(CLI::ExistingFile);
    return s;
  };

  GenDataOptions gd;
  CLI::App* s_gen = add_sub("gen-data", "Write train/test CSVs for a synthetic preset");
  opt(s_gen, "--preset", gd.preset, "Preset name")
      ->required()
      ->check(CLI::IsMember(data::preset_names()));
  opt(s_gen, "--out", gd.out, "Output directory")->required();
  opt(s_gen, "--seed", gd.seed, "Root seed");
  opt(s_gen, "--n-train", gd.n_train, "Training rows");
  opt(s_gen, "--n-test", gd.n_test, "Test rows");

  TrainOptions tr;
  CLI::App* s_train = add_sub("train", "Train an ffnn or cccpde model on a CSV");
  opt(s_train, "--model", tr.model, "Model kind")->required()->check(CLI::IsMember({"ffnn", "cccpde"}));
  opt(s_train, "--data", tr.data, "Training CSV (label,f0,f1,...)")->required();
  opt(s_train, "--out", tr.out, "Output directory")->required();
  opt(s_train, "--seed", tr.seed, "Root seed (init, shuffle and dropout streams)");
  opt(s_train, "--epochs", tr.epochs, "Epochs");
  opt(s_train, "--batch-size", tr.batch_size, "Minibatch size");
  opt(s_train, "--lr", tr.lr, "Adam learning rate");
  opt(s_train, "--nll-weight", tr.nll_weight, "Weight of the class-conditional NLL term");
  opt(s_train, "--bce-weight", tr.bce_weight, "Weight of the sigmoid-head BCE term");
  opt(s_train, "--base-depth", tr.base_depth, "Coupling layers in the shared base");
  opt(s_train, "--head-depth", tr.head_depth, "Coupling layers per class head");
  opt(s_train, "--hidden", tr.hidden, "Hidden width of the s and t networks");
  opt(s_train, "--disc-width", tr.disc_width, "Width of the sigmoid head's dense blocks");
  opt(s_train, "--disc-blocks", tr.disc_blocks, "Dense blocks in the sigmoid head");
  opt(s_train, "--ffnn-width", tr.ffnn_width, "ffnn dense block width");
  opt(s_train, "--ffnn-blocks", tr.ffnn_blocks, "ffnn dense blocks");
  opt(s_train, "--dropout", tr.dropout, "Dropout rate in dense blocks");
  opt(s_train, "--standardize", tr.standardize, "Standardize features with training statistics");
  opt(s_train, "--zero-init", tr.zero_init, "Start coupling layers as pure permutations");

  EvalOptions ev;
  CLI::App* s_eval = add_sub("eval", "Score a test CSV: reports, ROC before/after filtering");
  opt(s_eval, "--model", ev.model, "cccpde model file")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--ffnn", ev.ffnn, "Optional baseline ffnn model file")->check(CLI::ExistingFile);
  opt(s_eval, "--data", ev.data, "Test CSV")->required();
  opt(s_eval, "--out", ev.out, "Output directory")->required();
  opt(s_eval, "--seed", ev.seed, "Root seed (Monte Carlo counts)");
  opt(s_eval, "--threshold", ev.threshold, "Abstain when the credible interval is wider than this");
  opt(s_eval, "--mass", ev.mass, "Credible interval mass");
  opt(s_eval, "--prior-a", ev.prior_a, "Beta prior a");
  opt(s_eval, "--prior-b", ev.prior_b, "Beta prior b");
  s_eval->add_option("--base-rate", ev.base_rate, "Positive base rate; replaces prior-a/prior-b");
  opt(s_eval, "--concentration", ev.concentration, "Prior strength used with --base-rate");
  s_eval->add_option("--volume", ev.volume, "Neighborhood volume V (overrides --volume-fraction)");
  opt(s_eval, "--volume-fraction", ev.volume_fraction, "V = prod_j (fraction * train std_j)");
  opt(s_eval, "--count-mode", ev.count_mode, "How densities become counts")
      ->check(CLI::IsMember({"pointwise", "monte-carlo"}));
  s_eval->add_option("--mc-radius", ev.mc_radius, "Ball radius for monte-carlo counts");
  opt(s_eval, "--mc-draws", ev.mc_draws, "Draws per point for monte-carlo counts");
  opt(s_eval, "--threads", ev.threads, "Worker threads for batch evaluation");

  SampleOptions sa;
  CLI::App* s_sample = add_sub("sample", "Draw samples from one class head");
  opt(s_sample, "--model", sa.model, "cccpde model file")->required()->check(CLI::ExistingFile);
  opt(s_sample, "--class", sa.cls, "Class head to sample")->required();
  opt(s_sample, "--n", sa.n, "Number of samples");
  opt(s_sample, "--seed", sa.seed, "Root seed");
  opt(s_sample, "--out", sa.out, "Output directory")->required();

  GridOptions gr;
  CLI::App* s_grid = add_sub("density-grid", "Evaluate a 2-D model on a regular grid");
  opt(s_grid, "--model", gr.model, "cccpde model file")->required()->check(CLI::ExistingFile);
  opt(s_grid, "--bounds", gr.bounds, "x_min,x_max,y_min,y_max")->expected(4)->delimiter(',');
  opt(s_grid, "--resolution", gr.resolution, "Points per axis");
  opt(s_grid, "--threads", gr.threads, "Worker threads");
  opt(s_grid, "--out", gr.out, "Output directory")->required();

  GlmOptions gl;
  CLI::App* s_glm = add_sub("glm-demo", "Heteroscedastic 1-D regression with a Gaussian NLL");
  opt(s_glm, "--seed", gl.seed, "Root seed");
  opt(s_glm, "--out", gl.out, "Output directory")->required();
  opt(s_glm, "--n", gl.n, "Training samples");
  opt(s_glm, "--grid", gl.grid, "Held-out grid points on [-3, 3]");
  opt(s_glm, "--epochs", gl.epochs, "Epochs");
  opt(s_glm, "--batch-size", gl.batch_size, "Minibatch size");
  opt(s_glm, "--lr", gl.lr, "Adam learning rate");
  opt(s_glm, "--hidden", gl.hidden, "Trunk width");
  opt(s_glm, "--depth", gl.depth, "Trunk layers");

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args, app);
    std::vector<const char*> argv;
    for (const auto& a : expanded) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (s_gen->parsed()) return cmd_gen_data(gd, *s_gen, out);
    if (s_train->parsed()) return cmd_train(tr, *s_train, out, err);
    if (s_eval->parsed()) return cmd_eval(ev, *s_eval, out, err);
    if (s_sample->parsed()) return cmd_sample(sa, *s_sample, out);
    if (s_grid->parsed()) return cmd_density_grid(gr, *s_grid, out);
    if (s_glm->parsed()) return cmd_glm_demo(gl, *s_glm, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace cccpde::cli
