#include <cmath>
#include <stdexcept>

#include "cccpde/errors.hpp"
#include "cccpde/model.hpp"

namespace cccpde::model {

using nn::Activation;

GlmRegressor::GlmRegressor(const GlmConfig& config, Rng& init_rng) : config_(config) {
  if (config_.dim == 0 || config_.hidden == 0 || config_.depth == 0) {
    throw std::invalid_argument("GlmConfig: dim, hidden and depth must be positive");
  }
  std::vector<std::size_t> sizes{config_.dim};
  std::vector<Activation> acts;
  for (std::size_t i = 0; i < config_.depth; ++i) {
    sizes.push_back(config_.hidden);
    acts.push_back(Activation::tanh);
  }
  trunk_ = nn::Mlp(sizes, acts, init_rng);
  mean_head_ = nn::DenseLayer::glorot(config_.hidden, 1, init_rng);
  log_var_head_ = nn::DenseLayer(config_.hidden, 1);
}

GlmPrediction GlmRegressor::predict(const Matrix& x) const {
  const Matrix h = trunk_.apply(x);
  const Matrix mu = mean_head_.apply(h);
  const Matrix lv = log_var_head_.apply(h);
  GlmPrediction out;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out.mean.push_back(mu(i, 0));
    out.stddev.push_back(std::exp(0.5 * lv(i, 0)));
  }
  return out;
}

double GlmRegressor::loss(const Matrix& x, const Matrix& y) {
  const Matrix h = trunk_.forward(x);
  const Matrix mu = mean_head_.forward(h);
  const Matrix lv = log_var_head_.forward(h);
  const nn::GaussianNll nll = nn::gaussian_nll_loss(mu, lv, y);
  Matrix g = mean_head_.backward(nll.grad_mu);
  g += log_var_head_.backward(nll.grad_log_var);
  trunk_.backward(g);
  return nll.value;
}

nn::ParamList GlmRegressor::params() {
  nn::ParamList out;
  trunk_.collect(out);
  mean_head_.collect(out);
  log_var_head_.collect(out);
  return out;
}

GlmPrediction glm_fit_and_predict(const Matrix& x, std::span<const double> y,
                                  const GlmFitOptions& options, const Matrix& query) {
  if (x.rows() == 0) throw std::invalid_argument("glm_fit_and_predict: empty data");
  GlmConfig cfg = options.model;
  cfg.dim = x.cols();
  Rng init = Rng::derive(options.train.seed, "init");
  GlmRegressor model(cfg, init);
  train(model, x, y, options.train);
  return model.predict(query);
}

}  // namespace cccpde::model
