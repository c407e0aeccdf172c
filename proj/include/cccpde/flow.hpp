#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cccpde/matrix.hpp"
#include "cccpde/nn.hpp"
#include "cccpde/rng.hpp"

namespace cccpde::flow {

/// ln N(z; 0, I) per row.
std::vector<double> standard_normal_log_density(const Matrix& z);

struct FlowOutput {
  Matrix y;
  std::vector<double> log_det;  // one entry per row
};

/// Affine coupling layer. The input is permuted, the first `split()`
/// coordinates pass through unchanged, and the rest are mapped as
///   y_b = x_b * exp(s(x_a)) + t(x_a).
/// Outputs stay in permuted order; log|det J| = sum of s(x_a) per row.
///
/// s and t are three-layer perceptrons (d -> h -> h -> D - d) with leaky ReLU
/// after the first two layers; s ends in tanh, t is linear.
class CouplingLayer {
 public:
  CouplingLayer() = default;
  /// Random permutation drawn from `rng`. With zero_init_output the last
  /// layer of both nets starts at zero, so the layer begins as a pure permutation.
  CouplingLayer(std::size_t dim, std::size_t hidden, Rng& rng, bool zero_init_output);
  CouplingLayer(std::size_t dim, std::size_t hidden, std::vector<std::size_t> permutation,
                Rng& rng, bool zero_init_output);

  std::size_t dim() const { return permutation_.size(); }
  std::size_t split() const { return dim() / 2; }
  std::size_t hidden() const { return scale_net_.layers().front().out_size(); }
  const std::vector<std::size_t>& permutation() const { return permutation_; }
  const std::vector<std::size_t>& inverse_permutation() const { return inverse_; }
  /// Replaces the permutation (used when restoring a saved model).
  void set_permutation(std::vector<std::size_t> permutation);

  FlowOutput transform(const Matrix& x) const;
  FlowOutput forward(const Matrix& x);
  /// Gradients w.r.t. the outputs and per-row log-det; returns d/dx.
  Matrix backward(const Matrix& grad_y, std::span<const double> grad_log_det);
  Matrix inverse(const Matrix& y) const;

  nn::Mlp& scale_net() { return scale_net_; }
  nn::Mlp& shift_net() { return shift_net_; }
  const nn::Mlp& scale_net() const { return scale_net_; }
  const nn::Mlp& shift_net() const { return shift_net_; }
  void collect(nn::ParamList& out);

 private:
  Matrix permute(const Matrix& x) const;
  Matrix unpermute(const Matrix& xp) const;

  std::vector<std::size_t> permutation_;  // permuted column j reads input column permutation_[j]
  std::vector<std::size_t> inverse_;
  nn::Mlp scale_net_;
  nn::Mlp shift_net_;
  // forward cache
  Matrix passive_;
  Matrix active_;
  Matrix scale_exp_;
};

/// Ordered composition of coupling layers sharing one dimension. The forward
/// direction maps data to latent space.
class FlowStack {
 public:
  FlowStack() = default;
  explicit FlowStack(std::size_t dim) : dim_(dim) {}
  FlowStack(std::size_t dim, std::size_t depth, std::size_t hidden, Rng& rng,
            bool zero_init_output);

  std::size_t dim() const { return dim_; }
  std::size_t depth() const { return layers_.size(); }
  void push_back(CouplingLayer layer);

  FlowOutput transform(const Matrix& x) const;
  FlowOutput forward(const Matrix& x);
  Matrix backward(const Matrix& grad_z, std::span<const double> grad_log_det);
  Matrix inverse(const Matrix& z) const;

  /// ln p_X(x) = ln N(f(x); 0, I) + sum of forward log-dets.
  std::vector<double> log_density(const Matrix& x) const;

  /// Draws z ~ N(0, I) row by row and maps it back through the inverse.
  Matrix sample(Rng& rng, std::size_t n) const;

  std::vector<CouplingLayer>& layers() { return layers_; }
  const std::vector<CouplingLayer>& layers() const { return layers_; }
  void collect(nn::ParamList& out);

 private:
  std::size_t dim_ = 0;
  std::vector<CouplingLayer> layers_;
};

}  // namespace cccpde::flow
