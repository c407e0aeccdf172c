#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cccpde/data.hpp"
#include "cccpde/flow.hpp"
#include "cccpde/matrix.hpp"
#include "cccpde/nn.hpp"
#include "cccpde/rng.hpp"

namespace cccpde::model {

using data::Label;

struct LossWeights {
  double nll = 1.0;  // class-conditional density term
  double bce = 1.0;  // discriminative head
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  LossWeights weights;

  /// Throws std::invalid_argument on epochs == 0, batch_size == 0, negative weights.
  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  double nll = 0.0;
  double bce = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> trace;
  std::uint64_t optimizer_steps = 0;
};

// ---------------------------------------------------------------------------

struct CccpDeConfig {
  std::size_t dim = 2;
  std::size_t num_classes = 2;
  std::size_t base_depth = 3;
  std::size_t head_depth = 1;
  std::size_t coupling_hidden = 64;
  std::size_t disc_width = 64;
  std::size_t disc_blocks = 3;
  double dropout = 0.05;
  /// Start every coupling layer as a pure permutation.
  bool zero_init_output = true;

  void validate() const;
};

struct CccpDeOutput {
  Matrix log_density;               // rows x num_classes, input-space log p_k(x)
  std::vector<double> disc_score;   // sigmoid head output per row
};

struct JointLossValue {
  double total = 0.0;
  double nll = 0.0;
  double bce = 0.0;
};

/// Shared coupling base, one coupling stack per class on top of it, and a
/// sigmoid discriminative head fed by the base output.
class CccpDeModel {
 public:
  CccpDeModel(const CccpDeConfig& config, Rng& init_rng);

  const CccpDeConfig& config() const { return config_; }
  std::size_t dim() const { return config_.dim; }
  std::size_t num_classes() const { return config_.num_classes; }

  /// Pure inference pass (dropout off).
  CccpDeOutput forward(const Matrix& x) const;

  /// Mean negative log-density under each row's own class head plus mean
  /// BCE of the discriminative head, weighted. Gradients of the weighted sum
  /// are accumulated into the parameters; both terms reach the base. The BCE
  /// term requires num_classes == 2 when its weight is positive.
  JointLossValue joint_loss(const Matrix& x, std::span<const Label> labels, LossWeights weights,
                            Rng& dropout_rng, bool training = true);

  /// Same objective evaluated through forward(); no gradients, no dropout.
  JointLossValue loss_value(const Matrix& x, std::span<const Label> labels,
                            LossWeights weights) const;

  /// Latent draws at head `cls` mapped back to input space.
  Matrix sample(std::size_t cls, std::size_t n, Rng& rng) const;

  /// Records N_k, pi_k and per-dimension feature stddev from training data.
  void set_training_statistics(const data::Dataset& train);
  void set_class_statistics(std::vector<double> counts, std::vector<double> priors);
  void set_feature_stddev(std::vector<double> stddev);
  const std::vector<double>& class_counts() const { return class_counts_; }
  const std::vector<double>& class_priors() const { return class_priors_; }
  const std::vector<double>& feature_stddev() const { return feature_stddev_; }

  /// Optional fixed standardization applied before the base; densities are
  /// reported in the original input space.
  void set_input_transform(data::Standardizer transform);
  const data::Standardizer& input_transform() const { return transform_; }

  flow::FlowStack& base() { return base_; }
  const flow::FlowStack& base() const { return base_; }
  std::vector<flow::FlowStack>& heads() { return heads_; }
  const std::vector<flow::FlowStack>& heads() const { return heads_; }
  std::vector<nn::DenseBlock>& disc_blocks() { return disc_blocks_; }
  nn::DenseLayer& disc_output() { return disc_output_; }

  /// All trainable parameters in a fixed order: base, heads, disc head.
  nn::ParamList params();

 private:
  void check_labels(std::span<const Label> labels, std::size_t rows) const;

  CccpDeConfig config_;
  data::Standardizer transform_;
  flow::FlowStack base_;
  std::vector<flow::FlowStack> heads_;
  std::vector<nn::DenseBlock> disc_blocks_;
  nn::DenseLayer disc_output_;
  std::vector<double> class_counts_;
  std::vector<double> class_priors_;
  std::vector<double> feature_stddev_;
};

// ---------------------------------------------------------------------------

struct FfnnConfig {
  std::size_t dim = 2;
  std::size_t width = 64;
  std::size_t blocks = 4;
  double dropout = 0.05;
};

/// Baseline classifier: dense blocks, then a dense layer with sigmoid output.
class FfnnModel {
 public:
  FfnnModel(const FfnnConfig& config, Rng& init_rng);

  const FfnnConfig& config() const { return config_; }
  std::vector<double> predict(const Matrix& x) const;
  /// Mean BCE; gradients accumulated into the parameters.
  double loss(const Matrix& x, std::span<const Label> labels, Rng& dropout_rng, bool training = true);
  double loss_value(const Matrix& x, std::span<const Label> labels) const;

  void set_input_transform(data::Standardizer transform);
  const data::Standardizer& input_transform() const { return transform_; }

  nn::ParamList params();

 private:
  FfnnConfig config_;
  data::Standardizer transform_;
  std::vector<nn::DenseBlock> blocks_;
  nn::DenseLayer output_;
};

// ---------------------------------------------------------------------------

struct GlmConfig {
  std::size_t dim = 1;
  std::size_t hidden = 64;
  std::size_t depth = 2;
};

struct GlmPrediction {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Shared tanh trunk with a linear mean head and a linear log-variance head.
class GlmRegressor {
 public:
  GlmRegressor(const GlmConfig& config, Rng& init_rng);

  const GlmConfig& config() const { return config_; }
  GlmPrediction predict(const Matrix& x) const;
  /// Gaussian NLL; gradients accumulated into the parameters.
  double loss(const Matrix& x, const Matrix& y);

  nn::ParamList params();

 private:
  GlmConfig config_;
  nn::Mlp trunk_;
  nn::DenseLayer mean_head_;
  nn::DenseLayer log_var_head_;
};

// ---------------------------------------------------------------------------
// Training. Minibatch Adam over epochs shuffled by Rng::derive(seed, "shuffle");
// dropout masks come from Rng::derive(seed, "dropout").

TrainReport train(CccpDeModel& model, const data::Dataset& train_set, const TrainConfig& config);
TrainReport train(FfnnModel& model, const data::Dataset& train_set, const TrainConfig& config);
TrainReport train(GlmRegressor& model, const Matrix& x, std::span<const double> y,
                  const TrainConfig& config);

struct GlmFitOptions {
  GlmConfig model;
  TrainConfig train{.epochs = 400, .batch_size = 128, .learning_rate = 1e-3, .seed = 0, .weights = {}};
};

/// Fits a GlmRegressor to (x, y) and predicts (mu, sigma) at `query`.
GlmPrediction glm_fit_and_predict(const Matrix& x, std::span<const double> y,
                                  const GlmFitOptions& options, const Matrix& query);

// ---------------------------------------------------------------------------
// Model files: magic, format version, payload length, little-endian payload,
// trailing CRC-32.

inline constexpr std::uint32_t kModelFormatVersion = 1;

enum class ModelKind : std::uint32_t { cccpde = 1, ffnn = 2 };

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ModelVersionError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class ModelTruncatedError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class ModelChecksumError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

std::vector<std::uint8_t> encode_model(const CccpDeModel& model);
std::vector<std::uint8_t> encode_model(const FfnnModel& model);
CccpDeModel decode_cccpde(std::span<const std::uint8_t> bytes);
FfnnModel decode_ffnn(std::span<const std::uint8_t> bytes);
ModelKind peek_kind(std::span<const std::uint8_t> bytes);

void save_model(const CccpDeModel& model, const std::filesystem::path& path);
void save_model(const FfnnModel& model, const std::filesystem::path& path);
std::vector<std::uint8_t> read_model_bytes(const std::filesystem::path& path);
CccpDeModel load_cccpde(const std::filesystem::path& path);
FfnnModel load_ffnn(const std::filesystem::path& path);

}  // namespace cccpde::model
