#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cccpde/errors.hpp"
#include "cccpde/model.hpp"

namespace cccpde::model {

using nn::Activation;

void TrainConfig::validate() const {
  if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be > 0");
  if (weights.nll < 0.0 || weights.bce < 0.0) {
    throw std::invalid_argument("TrainConfig: loss weights must be >= 0");
  }
}

void CccpDeConfig::validate() const {
  if (dim < 2) throw std::invalid_argument("CccpDeConfig: dimension must be >= 2");
  if (num_classes < 2) throw std::invalid_argument("CccpDeConfig: need at least 2 classes");
  if (coupling_hidden == 0 || disc_width < 2) {
    throw std::invalid_argument("CccpDeConfig: widths must be positive (disc width >= 2)");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("CccpDeConfig: dropout must be in [0, 1)");
  }
}

CccpDeModel::CccpDeModel(const CccpDeConfig& config, Rng& init_rng) : config_(config) {
  config_.validate();
  base_ = flow::FlowStack(config_.dim, config_.base_depth, config_.coupling_hidden, init_rng,
                          config_.zero_init_output);
  for (std::size_t k = 0; k < config_.num_classes; ++k) {
    heads_.emplace_back(config_.dim, config_.head_depth, config_.coupling_hidden, init_rng,
                        config_.zero_init_output);
  }
  std::size_t in = config_.dim;
  for (std::size_t b = 0; b < config_.disc_blocks; ++b) {
    disc_blocks_.emplace_back(in, config_.disc_width, config_.dropout, Activation::elu, init_rng);
    in = config_.disc_width;
  }
  disc_output_ = nn::DenseLayer::glorot(in, 1, init_rng);
  class_counts_.assign(config_.num_classes, 0.0);
  class_priors_.assign(config_.num_classes, 1.0 / static_cast<double>(config_.num_classes));
  feature_stddev_.assign(config_.dim, 1.0);
}

void CccpDeModel::check_labels(std::span<const Label> labels, std::size_t rows) const {
  if (labels.size() != rows) {
    throw ShapeError("CccpDeModel: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(rows) + " rows");
  }
  for (Label l : labels) {
    if (l >= config_.num_classes) {
      throw std::out_of_range("CccpDeModel: label " + std::to_string(l) + " out of range for " +
                              std::to_string(config_.num_classes) + " classes");
    }
  }
}

CccpDeOutput CccpDeModel::forward(const Matrix& x) const {
  if (x.cols() != config_.dim) {
    throw ShapeError("CccpDeModel: input " + x.shape_string() + " for dimension " +
                     std::to_string(config_.dim));
  }
  const double log_jacobian = -transform_.log_scale();
  const flow::FlowOutput b = base_.transform(transform_.apply(x));
  CccpDeOutput out{Matrix(x.rows(), config_.num_classes), std::vector<double>(x.rows())};
  for (std::size_t k = 0; k < heads_.size(); ++k) {
    const flow::FlowOutput h = heads_[k].transform(b.y);
    const std::vector<double> latent = flow::standard_normal_log_density(h.y);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      out.log_density(i, k) = latent[i] + h.log_det[i] + b.log_det[i] + log_jacobian;
    }
  }
  Matrix hidden = b.y;
  for (const auto& block : disc_blocks_) hidden = block.apply(hidden);
  const Matrix p = nn::activate(Activation::sigmoid, disc_output_.apply(hidden));
  for (std::size_t i = 0; i < x.rows(); ++i) out.disc_score[i] = p(i, 0);
  return out;
}

JointLossValue CccpDeModel::joint_loss(const Matrix& x, std::span<const Label> labels,
                                       LossWeights weights, Rng& dropout_rng, bool training) {
  if (x.cols() != config_.dim) {
    throw ShapeError("CccpDeModel: input " + x.shape_string() + " for dimension " +
                     std::to_string(config_.dim));
  }
  check_labels(labels, x.rows());
  if (weights.bce > 0.0 && config_.num_classes != 2) {
    throw std::invalid_argument("CccpDeModel: the discriminative loss needs exactly 2 classes");
  }
  const std::size_t n = x.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double log_jacobian = -transform_.log_scale();

  const flow::FlowOutput b = base_.forward(transform_.apply(x));
  Matrix grad_base(n, config_.dim);
  std::vector<double> grad_base_log_det(n, 0.0);
  JointLossValue value;

  if (weights.nll > 0.0) {
    for (std::size_t k = 0; k < heads_.size(); ++k) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < n; ++i)
        if (labels[i] == k) rows.push_back(i);
      if (rows.empty()) continue;
      const flow::FlowOutput h = heads_[k].forward(select_rows(b.y, rows));
      const std::vector<double> latent = flow::standard_normal_log_density(h.y);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        value.nll -= latent[r] + h.log_det[r] + b.log_det[rows[r]] + log_jacobian;
      }
      // d(-log p)/dz = z, d(-log p)/d(logdet) = -1.
      const double scale = weights.nll * inv_n;
      Matrix grad_z = h.y * scale;
      const std::vector<double> grad_ld(rows.size(), -scale);
      const Matrix grad_in = heads_[k].backward(grad_z, grad_ld);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        auto dst = grad_base.row(rows[r]);
        auto src = grad_in.row(r);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
        grad_base_log_det[rows[r]] -= scale;
      }
    }
    value.nll *= inv_n;
  }

  if (weights.bce > 0.0) {
    Matrix hidden = b.y;
    for (auto& block : disc_blocks_) hidden = block.forward(hidden, dropout_rng, training);
    const Matrix logits = disc_output_.forward(hidden);
    const Matrix p = nn::activate(Activation::sigmoid, logits);
    Matrix y(n, 1);
    for (std::size_t i = 0; i < n; ++i) y(i, 0) = static_cast<double>(labels[i]);
    const nn::LossWithGrad bce = nn::bce_loss(p, y);
    value.bce = bce.value;
    Matrix g = nn::activation_grad(Activation::sigmoid, logits, bce.grad * weights.bce);
    g = disc_output_.backward(g);
    for (std::size_t i = disc_blocks_.size(); i-- > 0;) g = disc_blocks_[i].backward(g);
    grad_base += g;
  }

  base_.backward(grad_base, grad_base_log_det);
  value.total = weights.nll * value.nll + weights.bce * value.bce;
  return value;
}

JointLossValue CccpDeModel::loss_value(const Matrix& x, std::span<const Label> labels,
                                       LossWeights weights) const {
  check_labels(labels, x.rows());
  if (weights.bce > 0.0 && config_.num_classes != 2) {
    throw std::invalid_argument("CccpDeModel: the discriminative loss needs exactly 2 classes");
  }
  const CccpDeOutput out = forward(x);
  const double n = static_cast<double>(x.rows());
  JointLossValue value;
  for (std::size_t i = 0; i < x.rows(); ++i) value.nll -= out.log_density(i, labels[i]);
  value.nll /= n;
  if (weights.bce > 0.0) {
    Matrix p(x.rows(), 1), y(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      p(i, 0) = out.disc_score[i];
      y(i, 0) = static_cast<double>(labels[i]);
    }
    value.bce = nn::bce_loss(p, y).value;
  }
  value.total = weights.nll * value.nll + weights.bce * value.bce;
  return value;
}

Matrix CccpDeModel::sample(std::size_t cls, std::size_t n, Rng& rng) const {
  if (cls >= heads_.size()) {
    throw std::out_of_range("CccpDeModel::sample: class " + std::to_string(cls) +
                            " out of range for " + std::to_string(heads_.size()) + " classes");
  }
  const Matrix base_space = heads_[cls].sample(rng, n);
  return transform_.invert(base_.inverse(base_space));
}

void CccpDeModel::set_training_statistics(const data::Dataset& train) {
  const auto counts = train.class_counts(config_.num_classes);
  std::vector<double> c(counts.begin(), counts.end());
  const double total = std::accumulate(c.begin(), c.end(), 0.0);
  std::vector<double> priors(c.size(), 1.0 / static_cast<double>(c.size()));
  if (total > 0.0) {
    for (std::size_t k = 0; k < c.size(); ++k) priors[k] = c[k] / total;
  }
  set_class_statistics(std::move(c), std::move(priors));
  set_feature_stddev(data::column_stddev(train.features));
}

void CccpDeModel::set_class_statistics(std::vector<double> counts, std::vector<double> priors) {
  if (counts.size() != config_.num_classes || priors.size() != config_.num_classes) {
    throw ShapeError("CccpDeModel: class statistics must have one entry per class");
  }
  for (double c : counts)
    if (!(c >= 0.0)) throw std::invalid_argument("CccpDeModel: class counts must be >= 0");
  const double sum = std::accumulate(priors.begin(), priors.end(), 0.0);
  for (double p : priors)
    if (!(p >= 0.0)) throw std::invalid_argument("CccpDeModel: priors must be >= 0");
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("CccpDeModel: priors must sum to 1");
  class_counts_ = std::move(counts);
  class_priors_ = std::move(priors);
}

void CccpDeModel::set_feature_stddev(std::vector<double> stddev) {
  if (stddev.size() != config_.dim) throw ShapeError("CccpDeModel: feature stddev length != dim");
  feature_stddev_ = std::move(stddev);
}

void CccpDeModel::set_input_transform(data::Standardizer transform) {
  if (!transform.is_identity() && transform.dim() != config_.dim) {
    throw ShapeError("CccpDeModel: input transform dimension != model dimension");
  }
  transform_ = std::move(transform);
}

nn::ParamList CccpDeModel::params() {
  nn::ParamList out;
  base_.collect(out);
  for (auto& head : heads_) head.collect(out);
  for (auto& block : disc_blocks_) block.collect(out);
  disc_output_.collect(out);
  return out;
}

}  // namespace cccpde::model
