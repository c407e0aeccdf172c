#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cccpde/matrix.hpp"
#include "cccpde/rng.hpp"

namespace cccpde::nn {

/// A trainable tensor and its accumulated gradient.
struct Param {
  Matrix value;
  Matrix grad;

  explicit Param(Matrix v = {}) : value(std::move(v)), grad(value.rows(), value.cols()) {}
  void zero_grad() { grad.fill(0.0); }
};

using ParamList = std::vector<Param*>;

void zero_grads(const ParamList& params);

// ---------------------------------------------------------------------------
// Activations

enum class Activation { identity, elu, leaky_relu, tanh, sigmoid };

inline constexpr double kLeakyReluSlope = 0.01;

/// Throws std::invalid_argument for an unknown name.
Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation act);

Matrix activate(Activation act, const Matrix& x);

/// upstream * act'(x), elementwise; `x` is the pre-activation input.
Matrix activation_grad(Activation act, const Matrix& x, const Matrix& upstream);

// ---------------------------------------------------------------------------
// Layers. Each has a pure `apply` for inference and a caching `forward` whose
// `backward` accumulates parameter gradients and returns d(loss)/d(input).

class DenseLayer {
 public:
  DenseLayer() = default;
  /// Zero weights and bias.
  DenseLayer(std::size_t in, std::size_t out);
  /// Glorot-uniform weights in +-sqrt(6 / (in + out)), zero bias.
  static DenseLayer glorot(std::size_t in, std::size_t out, Rng& rng);

  std::size_t in_size() const { return weights_.value.rows(); }
  std::size_t out_size() const { return weights_.value.cols(); }

  Matrix apply(const Matrix& x) const;
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& upstream);

  Param& weights() { return weights_; }
  Param& bias() { return bias_; }
  const Param& weights() const { return weights_; }
  const Param& bias() const { return bias_; }
  void collect(ParamList& out);

 private:
  Param weights_;  // in x out
  Param bias_;     // 1 x out
  Matrix input_;
};

/// Per-row standardization followed by an affine gain/bias.
class LayerNorm {
 public:
  static constexpr double kEpsilon = 1e-5;

  LayerNorm() = default;
  explicit LayerNorm(std::size_t features);

  std::size_t features() const { return gain_.value.cols(); }

  Matrix apply(const Matrix& x) const;
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& upstream);

  Param& gain() { return gain_; }
  Param& shift() { return shift_; }
  const Param& gain() const { return gain_; }
  const Param& shift() const { return shift_; }
  void collect(ParamList& out);

 private:
  Param gain_;   // 1 x F, ones
  Param shift_;  // 1 x F, zeros
  Matrix normalized_;
  std::vector<double> inv_std_;
};

struct DropoutResult {
  Matrix output;
  /// Per-entry multiplier: 0 for dropped entries, 1/(1-rate) for survivors.
  Matrix mask;
};

/// Inverted dropout. Identity (mask of ones) when !training or rate == 0.
DropoutResult dropout(const Matrix& x, double rate, Rng& rng, bool training);

/// dropout -> dense -> layer norm -> activation.
class DenseBlock {
 public:
  DenseBlock() = default;
  DenseBlock(std::size_t in, std::size_t out, double dropout_rate, Activation act, Rng& rng);

  double dropout_rate() const { return rate_; }
  Activation activation() const { return act_; }
  std::size_t in_size() const { return dense_.in_size(); }
  std::size_t out_size() const { return dense_.out_size(); }

  Matrix apply(const Matrix& x) const;
  /// `rng` drives the dropout mask; it is untouched when !training.
  Matrix forward(const Matrix& x, Rng& rng, bool training);
  Matrix backward(const Matrix& upstream);

  DenseLayer& dense() { return dense_; }
  LayerNorm& norm() { return norm_; }
  const DenseLayer& dense() const { return dense_; }
  const LayerNorm& norm() const { return norm_; }
  void collect(ParamList& out);

 private:
  double rate_ = 0.0;
  Activation act_ = Activation::elu;
  DenseLayer dense_;
  LayerNorm norm_;
  Matrix mask_;
  Matrix pre_activation_;
};

/// Plain multilayer perceptron: dense layers each followed by an activation.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = {in, h1, ..., out}; activations.size() == sizes.size() - 1.
  /// With zero_last, the final layer starts at zero weights and bias.
  Mlp(std::span<const std::size_t> sizes, std::span<const Activation> activations, Rng& rng,
      bool zero_last = false);

  std::size_t in_size() const { return layers_.front().in_size(); }
  std::size_t out_size() const { return layers_.back().out_size(); }
  std::size_t depth() const { return layers_.size(); }

  Matrix apply(const Matrix& x) const;
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& upstream);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  const std::vector<Activation>& activations() const { return acts_; }
  void collect(ParamList& out);

 private:
  std::vector<DenseLayer> layers_;
  std::vector<Activation> acts_;
  std::vector<Matrix> pre_;
};

// ---------------------------------------------------------------------------
// Losses (means over the batch).

inline constexpr double kProbabilityClamp = 1e-7;

struct LossWithGrad {
  double value = 0.0;
  Matrix grad;
};

/// Binary cross-entropy of N x 1 probabilities against N x 1 {0,1} labels.
/// Probabilities are clamped to [1e-7, 1 - 1e-7]; clamped entries get zero gradient.
LossWithGrad bce_loss(const Matrix& p, const Matrix& labels);

struct GaussianNll {
  double value = 0.0;
  Matrix grad_mu;
  Matrix grad_log_var;
};

/// Mean of ln sqrt(2 pi s2) + (y - mu)^2 / (2 s2) with s2 = exp(log_var).
GaussianNll gaussian_nll_loss(const Matrix& mu, const Matrix& log_var, const Matrix& y);

// ---------------------------------------------------------------------------

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moment buffers are bound to the parameter list
/// on first use; later calls must pass the same list in the same order.
class Adam {
 public:
  explicit Adam(AdamOptions options = {});

  void step(const ParamList& params);
  std::uint64_t steps() const { return steps_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  std::uint64_t steps_ = 0;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
};

}  // namespace cccpde::nn
