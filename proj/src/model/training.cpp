#include <numeric>
#include <stdexcept>

#include "cccpde/errors.hpp"
#include "cccpde/model.hpp"

namespace cccpde::model {

namespace {

// Runs shuffled minibatch Adam. `batch_loss(rows)` must zero nothing itself;
// it returns the batch's loss components with gradients accumulated.
template <typename BatchLoss>
TrainReport run_minibatches(std::size_t n, const TrainConfig& config, const nn::ParamList& params,
                            BatchLoss&& batch_loss) {
  config.validate();
  if (n == 0) throw std::invalid_argument("train: empty dataset");
  Rng shuffle_rng = Rng::derive(config.seed, "shuffle");
  nn::Adam adam({.learning_rate = config.learning_rate});
  TrainReport report;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<std::size_t> order = random_permutation(n, shuffle_rng);
    EpochStats stats{epoch, 0.0, 0.0, 0.0};
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::span<const std::size_t> rows(order.data() + start, end - start);
      nn::zero_grads(params);
      const EpochStats batch = batch_loss(rows);
      adam.step(params);
      const double w = static_cast<double>(rows.size());
      stats.loss += batch.loss * w;
      stats.nll += batch.nll * w;
      stats.bce += batch.bce * w;
    }
    const double nd = static_cast<double>(n);
    stats.loss /= nd;
    stats.nll /= nd;
    stats.bce /= nd;
    report.trace.push_back(stats);
  }
  report.optimizer_steps = adam.steps();
  return report;
}

std::vector<Label> gather(std::span<const Label> labels, std::span<const std::size_t> rows) {
  std::vector<Label> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(labels[r]);
  return out;
}

}  // namespace

TrainReport train(CccpDeModel& model, const data::Dataset& train_set, const TrainConfig& config) {
  train_set.validate();
  if (train_set.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (train_set.dim() != model.dim()) {
    throw ShapeError("train: data dimension " + std::to_string(train_set.dim()) +
                     " != model dimension " + std::to_string(model.dim()));
  }
  model.set_training_statistics(train_set);
  Rng dropout_rng = Rng::derive(config.seed, "dropout");
  const nn::ParamList params = model.params();
  return run_minibatches(train_set.size(), config, params, [&](std::span<const std::size_t> rows) {
    const Matrix x = select_rows(train_set.features, rows);
    const std::vector<Label> y = gather(train_set.labels, rows);
    const JointLossValue v = model.joint_loss(x, y, config.weights, dropout_rng, true);
    return EpochStats{0, v.total, v.nll, v.bce};
  });
}

TrainReport train(FfnnModel& model, const data::Dataset& train_set, const TrainConfig& config) {
  train_set.validate();
  if (train_set.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (train_set.dim() != model.config().dim) {
    throw ShapeError("train: data dimension " + std::to_string(train_set.dim()) +
                     " != model dimension " + std::to_string(model.config().dim));
  }
  Rng dropout_rng = Rng::derive(config.seed, "dropout");
  const nn::ParamList params = model.params();
  return run_minibatches(train_set.size(), config, params, [&](std::span<const std::size_t> rows) {
    const Matrix x = select_rows(train_set.features, rows);
    const std::vector<Label> y = gather(train_set.labels, rows);
    const double loss = model.loss(x, y, dropout_rng, true);
    return EpochStats{0, loss, 0.0, loss};
  });
}

TrainReport train(GlmRegressor& model, const Matrix& x, std::span<const double> y,
                  const TrainConfig& config) {
  if (x.rows() != y.size()) throw ShapeError("train: target count != rows");
  if (x.cols() != model.config().dim) throw ShapeError("train: data dimension != model dimension");
  const nn::ParamList params = model.params();
  return run_minibatches(x.rows(), config, params, [&](std::span<const std::size_t> rows) {
    Matrix yb(rows.size(), 1);
    for (std::size_t i = 0; i < rows.size(); ++i) yb(i, 0) = y[rows[i]];
    const double loss = model.loss(select_rows(x, rows), yb);
    return EpochStats{0, loss, loss, 0.0};
  });
}

}  // namespace cccpde::model
