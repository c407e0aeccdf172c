#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "cccpde/errors.hpp"
#include "cccpde/gradcheck.hpp"
#include "cccpde/nn.hpp"
#include "oracles.hpp"

namespace cccpde::nn {
namespace {

using cccpde::testing::random_matrix;

double projected(const Matrix& out, const Matrix& proj) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.values()[i] * proj.values()[i];
  return s;
}

// Checks d(<layer(x), proj>)/dx and /dparam against central differences.
// `run` performs a pure forward pass; `fwd_bwd` runs forward + backward and
// returns the input gradient, accumulating parameter gradients.
void check_gradients(const std::function<Matrix(const Matrix&)>& run,
                     const std::function<Matrix(const Matrix&, const Matrix&)>& fwd_bwd,
                     const ParamList& params, const Matrix& x, const Matrix& proj, double tol) {
  zero_grads(params);
  const Matrix grad_x = fwd_bwd(x, proj);
  const Matrix num_x =
      finite_diff_grad([&](const Matrix& xx) { return projected(run(xx), proj); }, x, 1e-5);
  EXPECT_LT(relative_error(grad_x, num_x), tol) << "input gradient";
  for (std::size_t p = 0; p < params.size(); ++p) {
    Param* param = params[p];
    const Matrix saved = param->value;
    const Matrix num = finite_diff_grad(
        [&](const Matrix& v) {
          param->value = v;
          const double out = projected(run(x), proj);
          param->value = saved;
          return out;
        },
        saved, 1e-5);
    EXPECT_LT(relative_error(param->grad, num), tol) << "parameter " << p << "\n" << testing::dump(param->grad) << testing::dump(num);
  }
}

TEST(Dense, IdentityWeights) {
  DenseLayer layer(2, 2);
  layer.weights().value = Matrix::identity(2);
  EXPECT_EQ(layer.apply(Matrix::from_rows({{1, 2}})), Matrix::from_rows({{1, 2}}));
}

TEST(Dense, HandArithmetic) {
  DenseLayer layer(2, 1);
  layer.weights().value = Matrix::from_rows({{2}, {3}});
  layer.bias().value = Matrix::from_rows({{1}});
  EXPECT_EQ(layer.apply(Matrix::from_rows({{1, 1}})), Matrix::from_rows({{6}}));
}

TEST(Dense, ShapeMismatchThrows) {
  DenseLayer layer(3, 2);
  EXPECT_THROW(layer.apply(Matrix(1, 2)), ShapeError);
}

TEST(Dense, GlorotWithinBound) {
  Rng rng(1);
  const DenseLayer layer = DenseLayer::glorot(10, 6, rng);
  const double bound = std::sqrt(6.0 / 16.0);
  for (double w : layer.weights().value.values()) EXPECT_LE(std::abs(w), bound);
  for (double b : layer.bias().value.values()) EXPECT_EQ(b, 0.0);
}

TEST(Dense, GradientsMatchFiniteDifferencesOverRandomShapes) {
  Rng rng(100);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(4), in = 1 + rng.below(5), out = 1 + rng.below(5);
    DenseLayer layer = DenseLayer::glorot(in, out, rng);
    layer.bias().value = random_matrix(1, out, rng);
    ParamList params;
    layer.collect(params);
    const Matrix x = random_matrix(n, in, rng);
    const Matrix proj = random_matrix(n, out, rng);
    check_gradients([&](const Matrix& xx) { return layer.apply(xx); },
                    [&](const Matrix& xx, const Matrix& g) {
                      layer.forward(xx);
                      return layer.backward(g);
                    },
                    params, x, proj, 1e-6);
  }
}

TEST(Activation, KnownValues) {
  EXPECT_EQ(activate(Activation::sigmoid, Matrix(1, 1))(0, 0), 0.5);
  EXPECT_EQ(activate(Activation::elu, Matrix::from_rows({{2.5}}))(0, 0), 2.5);
  EXPECT_NEAR(activate(Activation::elu, Matrix::from_rows({{-1}}))(0, 0), std::exp(-1.0) - 1.0,
              1e-15);
  EXPECT_NEAR(activate(Activation::leaky_relu, Matrix::from_rows({{-2}}))(0, 0), -0.02, 1e-15);
  EXPECT_EQ(activate(Activation::identity, Matrix::from_rows({{-7}}))(0, 0), -7.0);
}

TEST(Activation, ParseRoundTripsAndRejectsUnknown) {
  for (Activation a : {Activation::identity, Activation::elu, Activation::leaky_relu,
                       Activation::tanh, Activation::sigmoid})
    EXPECT_EQ(parse_activation(activation_name(a)), a);
  EXPECT_THROW(parse_activation("relu6"), std::invalid_argument);
}

TEST(Activation, GradientsMatchFiniteDifferencesAwayFromKinks) {
  Rng rng(5);
  for (Activation act : {Activation::identity, Activation::elu, Activation::leaky_relu,
                         Activation::tanh, Activation::sigmoid}) {
    for (int i = 0; i < 100; ++i) {
      double x = 8.0 * rng.uniform() - 4.0;
      if (std::abs(x) < 1e-3) x = 0.5;
      const Matrix xm = Matrix::from_rows({{x}});
      const Matrix one = Matrix::from_rows({{1.0}});
      const double analytic = activation_grad(act, xm, one)(0, 0);
      const double h = 1e-6;
      const double numeric = (activate(act, Matrix::from_rows({{x + h}}))(0, 0) -
                              activate(act, Matrix::from_rows({{x - h}}))(0, 0)) /
                             (2.0 * h);
      EXPECT_LE(std::abs(analytic - numeric), 1e-6 * std::max(1.0, std::abs(analytic)))
          << activation_name(act) << " at " << x;
    }
  }
}

TEST(LayerNorm, ConstantRowGivesShift) {
  LayerNorm ln(3);
  ln.shift().value = Matrix::from_rows({{0.1, 0.2, 0.3}});
  const Matrix out = ln.apply(Matrix::from_rows({{4, 4, 4}}));
  EXPECT_LT(max_abs_diff(out, Matrix::from_rows({{0.1, 0.2, 0.3}})), 1e-12);
}

TEST(LayerNorm, TwoElementRow) {
  LayerNorm ln(2);
  const Matrix out = ln.apply(Matrix::from_rows({{1, 3}}));
  EXPECT_NEAR(out(0, 0), -1.0, 1e-5);
  EXPECT_NEAR(out(0, 1), 1.0, 1e-5);
}

TEST(LayerNorm, GradientsMatchFiniteDifferencesOverRandomShapes) {
  Rng rng(200);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(4), f = 2 + rng.below(5);
    LayerNorm ln(f);
    ln.gain().value = random_matrix(1, f, rng, 2.0);
    ln.shift().value = random_matrix(1, f, rng);
    ParamList params;
    ln.collect(params);
    const Matrix x = random_matrix(n, f, rng, 3.0);
    const Matrix proj = random_matrix(n, f, rng);
    check_gradients([&](const Matrix& xx) { return ln.apply(xx); },
                    [&](const Matrix& xx, const Matrix& g) {
                      ln.forward(xx);
                      return ln.backward(g);
                    },
                    params, x, proj, 1e-5);
  }
}

TEST(Dropout, ZeroRateIsIdentity) {
  Rng rng(1);
  const Matrix x = random_matrix(4, 4, rng);
  EXPECT_EQ(dropout(x, 0.0, rng, true).output, x);
}

TEST(Dropout, InferenceIsIdentityAndLeavesRngUntouched) {
  Rng rng(1), ref(1);
  const Matrix x = random_matrix(4, 4, rng);
  rng = Rng(1);
  EXPECT_EQ(dropout(x, 0.7, rng, false).output, x);
  EXPECT_EQ(rng.next_u64(), ref.next_u64());
}

TEST(Dropout, EmpiricalRateAndMean) {
  Rng rng(77);
  const Matrix x(1000, 100, 1.0);
  const DropoutResult r = dropout(x, 0.5, rng, true);
  std::size_t zeros = 0;
  double sum = 0.0;
  for (double v : r.output.values()) {
    zeros += v == 0.0;
    sum += v;
  }
  const double frac = static_cast<double>(zeros) / static_cast<double>(x.size());
  EXPECT_NEAR(frac, 0.5, 0.01);
  EXPECT_NEAR(sum / static_cast<double>(x.size()), 1.0, 0.02);
}

TEST(Dropout, RejectsRateOutsideUnitInterval) {
  Rng rng(1);
  EXPECT_THROW(dropout(Matrix(1, 1), 1.0, rng, true), std::invalid_argument);
  EXPECT_THROW(dropout(Matrix(1, 1), -0.1, rng, true), std::invalid_argument);
}

TEST(DenseBlock, GradientsMatchFiniteDifferencesWithFixedMask) {
  Rng rng(300);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(4), in = 1 + rng.below(4), out = 2 + rng.below(4);
    DenseBlock block(in, out, 0.3, Activation::elu, rng);
    // A zero bias makes fully dropped rows constant, where layer norm is
    // dominated by epsilon and central differences lose accuracy.
    block.dense().bias().value = random_matrix(1, out, rng);
    ParamList params;
    block.collect(params);
    const Matrix x = random_matrix(n, in, rng);
    const Matrix proj = random_matrix(n, out, rng);
    const std::uint64_t mask_seed = rng.next_u64();
    auto run = [&](const Matrix& xx) {
      Rng mask_rng(mask_seed);
      DenseBlock copy = block;
      return copy.forward(xx, mask_rng, true);
    };
    check_gradients(run,
                    [&](const Matrix& xx, const Matrix& g) {
                      Rng mask_rng(mask_seed);
                      block.forward(xx, mask_rng, true);
                      return block.backward(g);
                    },
                    params, x, proj, 1e-5);
  }
}

TEST(DenseBlock, InferenceIsDeterministic) {
  Rng rng(3);
  DenseBlock block(3, 4, 0.5, Activation::elu, rng);
  const Matrix x = random_matrix(5, 3, rng);
  Rng a(1), b(999);
  EXPECT_EQ(block.forward(x, a, false), block.forward(x, b, false));
  EXPECT_EQ(block.apply(x), block.forward(x, a, false));
}

TEST(Mlp, GradientsMatchFiniteDifferencesOverRandomShapes) {
  Rng rng(400);
  const Activation acts[] = {Activation::elu, Activation::tanh, Activation::sigmoid,
                             Activation::identity};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(3);
    const std::vector<std::size_t> sizes = {1 + rng.below(4), 2 + rng.below(4), 1 + rng.below(3)};
    const std::vector<Activation> a = {acts[rng.below(4)], acts[rng.below(4)]};
    Mlp mlp(sizes, a, rng);
    ParamList params;
    mlp.collect(params);
    const Matrix x = random_matrix(n, sizes.front(), rng);
    const Matrix proj = random_matrix(n, sizes.back(), rng);
    check_gradients([&](const Matrix& xx) { return mlp.apply(xx); },
                    [&](const Matrix& xx, const Matrix& g) {
                      mlp.forward(xx);
                      return mlp.backward(g);
                    },
                    params, x, proj, 1e-5);
  }
}

TEST(Mlp, ZeroLastLayerOutputsZero) {
  Rng rng(1);
  const std::vector<std::size_t> sizes = {3, 8, 2};
  const std::vector<Activation> acts = {Activation::leaky_relu, Activation::identity};
  const Mlp mlp(sizes, acts, rng, true);
  EXPECT_EQ(mlp.apply(random_matrix(4, 3, rng)), Matrix(4, 2));
}

TEST(Bce, HalfProbability) {
  const LossWithGrad l = bce_loss(Matrix::from_rows({{0.5}}), Matrix::from_rows({{1}}));
  EXPECT_NEAR(l.value, std::log(2.0), 1e-15);
}

TEST(Bce, PerfectPredictionIsClampedSmall) {
  const LossWithGrad l =
      bce_loss(Matrix::from_rows({{1.0}, {0.0}}), Matrix::from_rows({{1}, {0}}));
  EXPECT_GE(l.value, 0.0);
  EXPECT_LE(l.value, -std::log(1.0 - 1e-7) + 1e-15);
}

TEST(Bce, GradientMatchesFiniteDifferences) {
  Rng rng(8);
  Matrix p(10, 1), y(10, 1);
  for (std::size_t i = 0; i < 10; ++i) {
    p(i, 0) = 0.05 + 0.9 * rng.uniform();
    y(i, 0) = static_cast<double>(rng.below(2));
  }
  const LossWithGrad l = bce_loss(p, y);
  const Matrix num = finite_diff_grad([&](const Matrix& pp) { return bce_loss(pp, y).value; }, p);
  EXPECT_LT(relative_error(l.grad, num), 1e-6);
}

TEST(GaussianNll, ZeroResidualUnitVariance) {
  const GaussianNll l =
      gaussian_nll_loss(Matrix::from_rows({{0.3}}), Matrix(1, 1), Matrix::from_rows({{0.3}}));
  EXPECT_NEAR(l.value, 0.918938533204673, 1e-12);
}

TEST(GaussianNll, UnitResidual) {
  const GaussianNll l =
      gaussian_nll_loss(Matrix(1, 1), Matrix(1, 1), Matrix::from_rows({{1.0}}));
  EXPECT_NEAR(l.value, 1.418938533204673, 1e-12);
}

TEST(GaussianNll, GradientsMatchFiniteDifferences) {
  Rng rng(9);
  const Matrix mu = random_matrix(6, 1, rng), lv = random_matrix(6, 1, rng),
               y = random_matrix(6, 1, rng, 2.0);
  const GaussianNll l = gaussian_nll_loss(mu, lv, y);
  const Matrix num_mu =
      finite_diff_grad([&](const Matrix& m) { return gaussian_nll_loss(m, lv, y).value; }, mu);
  const Matrix num_lv =
      finite_diff_grad([&](const Matrix& v) { return gaussian_nll_loss(mu, v, y).value; }, lv);
  EXPECT_LT(relative_error(l.grad_mu, num_mu), 1e-6);
  EXPECT_LT(relative_error(l.grad_log_var, num_lv), 1e-6);
}

TEST(GaussianNll, FiniteForFiniteInputs) {
  const GaussianNll l = gaussian_nll_loss(Matrix::from_rows({{50}}), Matrix::from_rows({{-30}}),
                                          Matrix::from_rows({{-50}}));
  EXPECT_TRUE(std::isfinite(l.value));
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  Param w(Matrix::from_rows({{1.0, -2.0, 0.5}}));
  w.grad = Matrix::from_rows({{3.7, -0.25, 1e3}});
  Adam adam;
  adam.step({&w});
  EXPECT_NEAR(w.value(0, 0), 1.0 - 1e-3, 1e-9);
  EXPECT_NEAR(w.value(0, 1), -2.0 + 1e-3, 1e-9);
  EXPECT_NEAR(w.value(0, 2), 0.5 - 1e-3, 1e-9);
  EXPECT_EQ(adam.steps(), 1u);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  Param w(Matrix::from_rows({{1.0, 2.0}}));
  Adam adam;
  for (int i = 0; i < 10; ++i) {
    w.zero_grad();
    adam.step({&w});
  }
  EXPECT_EQ(w.value, Matrix::from_rows({{1.0, 2.0}}));
}

TEST(Adam, ConvergesOnQuadratic) {
  Param w(Matrix(1, 1));
  Adam adam({.learning_rate = 0.1});
  for (int i = 0; i < 200; ++i) {
    w.grad(0, 0) = 2.0 * (w.value(0, 0) - 3.0);
    adam.step({&w});
  }
  EXPECT_LT(std::abs(w.value(0, 0) - 3.0), 0.05);
}

TEST(Adam, ShapeMismatchThrows) {
  Param w(Matrix(1, 2));
  w.grad = Matrix(2, 1);
  Adam adam;
  EXPECT_THROW(adam.step({&w}), ShapeError);
}

}  // namespace
}  // namespace cccpde::nn
