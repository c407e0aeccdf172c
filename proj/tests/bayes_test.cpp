#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "cccpde/bayes.hpp"
#include "cccpde/errors.hpp"
#include "cccpde/flow.hpp"
#include "oracles.hpp"

namespace cccpde::bayes {
namespace {

using cccpde::testing::quadrature_beta_cdf;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

TEST(BetaUpdate, OnePositive) {
  const BetaPosterior p = beta_update({1, 1}, 1, 0);
  EXPECT_EQ(p, BetaPosterior(2, 1));
  EXPECT_NEAR(p.mean(), 2.0 / 3.0, 1e-15);
}

TEST(BetaUpdate, ZeroCountsKeepPrior) { EXPECT_EQ(beta_update({3, 7}, 0, 0), BetaPosterior(3, 7)); }

TEST(BetaUpdate, Arithmetic) {
  EXPECT_NEAR(beta_update({1, 1}, 10, 30).mean(), 11.0 / 42.0, 1e-15);
}

TEST(BetaUpdate, RejectsNegativeCountsAndBadShapes) {
  EXPECT_THROW(beta_update({1, 1}, -1, 0), std::invalid_argument);
  EXPECT_THROW(BetaPosterior(0, 1), std::invalid_argument);
  EXPECT_THROW(BetaPosterior(1, -2), std::invalid_argument);
}

TEST(BetaUpdate, CommutesWithBatching) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const double p1 = 10 * rng.uniform(), n1 = 10 * rng.uniform();
    const double p2 = 10 * rng.uniform(), n2 = 10 * rng.uniform();
    const BetaPosterior seq = beta_update(beta_update({1, 1}, p1, n1), p2, n2);
    const BetaPosterior once = beta_update({1, 1}, p1 + p2, n1 + n2);
    EXPECT_NEAR(seq.a, once.a, 1e-12);
    EXPECT_NEAR(seq.b, once.b, 1e-12);
  }
}

TEST(BetaUpdate, PriorInjectionShiftsMeanMonotonically) {
  double prev = -1.0;
  for (double a0 : {0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
    const BetaPosterior post = beta_update({a0, 2.0}, 3.0, 3.0);
    EXPECT_GT(post.mean(), prev);
    prev = post.mean();
  }
  const BetaPosterior base = base_rate_prior(0.2, 10.0);
  EXPECT_NEAR(base.a, 2.0, 1e-15);
  EXPECT_NEAR(base.b, 8.0, 1e-15);
  // Posterior mean moves from the data mean (0.5) toward the prior mean (0.2).
  const double m = beta_update(base, 5, 5).mean();
  EXPECT_LT(m, 0.5);
  EXPECT_GT(m, 0.2);
}

TEST(BetaCdf, KnownValues) {
  EXPECT_NEAR(beta_cdf(0.5, 1, 1), 0.5, 1e-15);
  EXPECT_NEAR(beta_cdf(0.5, 2, 2), 0.5, 1e-14);
  EXPECT_EQ(beta_cdf(0.0, 2, 3), 0.0);
  EXPECT_EQ(beta_cdf(1.0, 2, 3), 1.0);
  // I_x(a, 1) = x^a.
  EXPECT_NEAR(beta_cdf(0.7, 3.5, 1), std::pow(0.7, 3.5), 1e-14);
}

TEST(BetaCdf, MatchesQuadrature) {
  EXPECT_NEAR(beta_cdf(0.3, 2, 5), quadrature_beta_cdf(0.3, 2, 5), 1e-8);
  const double shapes[] = {0.5, 1.0, 2.0, 50.0};
  const double xs[] = {0.01, 0.2, 0.5, 0.8, 0.99};
  for (double a : shapes)
    for (double b : shapes)
      for (double x : xs)
        EXPECT_NEAR(beta_cdf(x, a, b), quadrature_beta_cdf(x, a, b), 1e-8)
            << "a=" << a << " b=" << b << " x=" << x;
}

TEST(BetaCdf, MonotoneInX) {
  for (auto [a, b] : {std::pair{0.5, 0.5}, {2.0, 7.0}, {50.0, 3.0}, {400.0, 600.0}}) {
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double v = beta_cdf(i / 1000.0, a, b);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(BetaCdf, RejectsOutOfDomain) {
  EXPECT_THROW(beta_cdf(-0.1, 1, 1), DomainError);
  EXPECT_THROW(beta_cdf(1.1, 1, 1), DomainError);
  EXPECT_THROW(beta_cdf(0.5, 0, 1), DomainError);
}

TEST(BetaQuantile, InvertsCdf) {
  for (double p : {0.001, 0.025, 0.5, 0.975, 0.999})
    EXPECT_NEAR(beta_cdf(beta_quantile(p, 3.0, 9.0), 3.0, 9.0), p, 1e-12);
}

TEST(CredibleInterval, UniformPrior) {
  const CredibleInterval ci = credible_interval({1, 1}, 0.95);
  EXPECT_NEAR(ci.lo, 0.025, 1e-9);
  EXPECT_NEAR(ci.hi, 0.975, 1e-9);
  EXPECT_NEAR(ci.range(), 0.95, 1e-9);
}

TEST(CredibleInterval, MassIsExact) {
  for (auto [a, b] : {std::pair{0.5, 0.5}, {1.0, 30.0}, {12.0, 4.0}, {500.0, 1.0}, {2e4, 3e4}}) {
    const CredibleInterval ci = credible_interval({a, b}, 0.95);
    EXPECT_NEAR(beta_cdf(ci.hi, a, b) - beta_cdf(ci.lo, a, b), 0.95, 1e-8) << a << "," << b;
  }
}

TEST(CredibleInterval, TightPosteriorUnderQuadratureOracle) {
  const CredibleInterval ci = credible_interval({200, 200}, 0.95);
  EXPECT_LT(ci.range(), 0.1);
  EXPECT_NEAR(quadrature_beta_cdf(ci.lo, 200, 200), 0.025, 1e-8);
  EXPECT_NEAR(quadrature_beta_cdf(ci.hi, 200, 200), 0.975, 1e-8);
}

TEST(CredibleInterval, RangeShrinksWithTotalCount) {
  for (double ratio : {0.1, 0.3, 0.5, 0.9}) {
    double prev = 1.0;
    for (double total : {1.0, 2.0, 5.0, 10.0, 50.0, 200.0, 1000.0, 1e4}) {
      const double r = credible_interval(beta_update({1, 1}, ratio * total, (1 - ratio) * total)).range();
      EXPECT_LT(r, prev) << ratio << " " << total;
      prev = r;
    }
  }
}

TEST(CredibleInterval, RejectsBadMass) {
  EXPECT_THROW(credible_interval({1, 1}, 0.0), DomainError);
  EXPECT_THROW(credible_interval({1, 1}, 1.0), DomainError);
}

// Published retention example: a 0.33-0.36 credible set (range 0.03) is
// retained, a range of 0.42 is rejected, at threshold 0.1.
TEST(Report, RetentionSemantics) {
  const std::vector<double> counts = {1.0, 1.0};
  const UncertaintyReport narrow =
      posterior_report({{std::log(2528.0), std::log(1332.0)}}, counts, Volume::from_value(1.0));
  EXPECT_NEAR(narrow.interval.lo, 0.33, 0.005);
  EXPECT_NEAR(narrow.interval.hi, 0.36, 0.005);
  EXPECT_NEAR(narrow.interval.range(), 0.03, 0.002);
  EXPECT_FALSE(narrow.abstain);

  const UncertaintyReport wide =
      posterior_report({{std::log(8.0), std::log(8.0)}}, counts, Volume::from_value(1.0));
  EXPECT_NEAR(wide.interval.range(), 0.42, 0.03);
  EXPECT_TRUE(wide.abstain);
}

TEST(Report, UnderflowGivesPriorAndAbstains) {
  const std::vector<double> counts = {100.0, 100.0};
  const UncertaintyReport r =
      posterior_report({{kNegInf, -1e6}}, counts, Volume::from_value(0.01));
  EXPECT_EQ(r.counts.counts[0], 0.0);
  EXPECT_EQ(r.counts.counts[1], 0.0);
  EXPECT_EQ(r.posterior, BetaPosterior(1, 1));
  EXPECT_TRUE(r.abstain);
  EXPECT_EQ(r.point_estimate, 0.5);
}

TEST(Report, StrongOneSidedDensity) {
  const std::vector<double> counts = {1.0, 1.0};
  const UncertaintyReport r =
      posterior_report({{-800.0, std::log(500.0)}}, counts, Volume::from_value(1.0));
  EXPECT_GT(r.point_estimate, 0.99);
  EXPECT_LT(r.interval.range(), 0.02);
  EXPECT_FALSE(r.abstain);
  // Beta(501, 1) has CDF x^501.
  EXPECT_NEAR(r.interval.lo, std::pow(0.025, 1.0 / 501.0), 1e-9);
  EXPECT_NEAR(r.interval.hi, std::pow(0.975, 1.0 / 501.0), 1e-9);
}

TEST(Report, SymmetricSmallCounts) {
  const std::vector<double> counts = {1.0, 1.0};
  const UncertaintyReport r =
      posterior_report({{std::log(2.0), std::log(2.0)}}, counts, Volume::from_value(1.0));
  EXPECT_NEAR(r.point_estimate, 0.5, 1e-15);
  EXPECT_GT(r.interval.range(), 0.5);
  EXPECT_TRUE(r.abstain);
  EXPECT_NEAR(quadrature_beta_cdf(r.interval.lo, 3, 3), 0.025, 1e-8);
}

TEST(Report, MultiClassIsUnsupported) {
  const std::vector<double> counts = {1.0, 1.0, 1.0};
  try {
    posterior_report({{0.0, 0.0, 0.0}}, counts, Volume::from_value(1.0));
    FAIL() << "expected UnsupportedModeError";
  } catch (const UnsupportedModeError& e) {
    EXPECT_NE(std::string(e.what()).find("Dirichlet"), std::string::npos);
  }
}

TEST(PseudoCounts, Formula) {
  const std::vector<double> logp = {std::log(0.2), std::log(0.05)};
  const std::vector<double> n = {100.0, 300.0};
  const PseudoCounts c = pseudo_counts(logp, n, Volume::from_value(0.01));
  EXPECT_NEAR(c.counts[0], 0.01 * 100 * 0.2, 1e-14);
  EXPECT_NEAR(c.counts[1], 0.01 * 300 * 0.05, 1e-14);
  EXPECT_EQ(c.mode, CountMode::pointwise);
}

TEST(PseudoCounts, LogSpaceAvoidsUnderflowOfTinyVolumes) {
  // V = 1e-400 is not representable, but V * N * p with p = e^700 is.
  const std::vector<double> logp = {700.0};
  const std::vector<double> n = {1.0};
  const PseudoCounts c = pseudo_counts(logp, n, Volume::from_log(-400.0 * std::log(10.0)));
  EXPECT_GT(c.counts[0], 0.0);
  EXPECT_TRUE(std::isfinite(c.counts[0]));
}

TEST(PseudoCounts, EqualDensitiesKeepUniformPriorMean) {
  const std::vector<double> n = {50.0, 50.0};
  const UncertaintyReport r = posterior_report({{-1.3, -1.3}}, n, Volume::from_value(0.1));
  EXPECT_NEAR(r.point_estimate, 0.5, 1e-15);
}

TEST(Volume, FromStddevIsProductOfScaledStddevs) {
  const std::vector<double> sd = {2.0, 0.5, 4.0};
  EXPECT_NEAR(Volume::from_stddev(sd).value(), (0.1) * (0.025) * (0.2), 1e-15);
  EXPECT_NEAR(Volume::from_stddev(sd, 0.25).log_value(), std::log(0.5 * 0.125 * 1.0), 1e-14);
  EXPECT_THROW(Volume::from_value(0.0), DomainError);
}

TEST(MonteCarlo, BallVolume) {
  EXPECT_NEAR(ball_volume(1, 2.0), 4.0, 1e-14);
  EXPECT_NEAR(ball_volume(2, 1.0), std::numbers::pi, 1e-14);
  EXPECT_NEAR(ball_volume(3, 1.0), 4.0 / 3.0 * std::numbers::pi, 1e-14);
}

TEST(MonteCarlo, ConstantDensityIsExact) {
  Rng rng(1);
  const double kappa = 0.07;
  const std::vector<double> x = {0.3, -0.2};
  const double est = mc_count_estimate([&](std::span<const double>) { return std::log(kappa); }, x,
                                       0.5, 1000, rng, 250.0);
  EXPECT_NEAR(est, 250.0 * ball_volume(2, 0.5) * kappa, 1e-10);
}

TEST(MonteCarlo, ZeroClassCount) {
  Rng rng(1);
  const std::vector<double> x = {0.0, 0.0};
  EXPECT_EQ(mc_count_estimate([](std::span<const double>) { return 0.0; }, x, 0.1, 100, rng, 0.0),
            0.0);
}

TEST(MonteCarlo, RejectsTooFewDrawsOrBadRadius) {
  Rng rng(1);
  const std::vector<double> x = {0.0};
  auto f = [](std::span<const double>) { return 0.0; };
  EXPECT_THROW(mc_count_estimate(f, x, 0.1, 99, rng, 1.0), DomainError);
  EXPECT_THROW(mc_count_estimate(f, x, 0.0, 100, rng, 1.0), DomainError);
}

TEST(MonteCarlo, AgreesWithPointwiseCountsOnSmoothFlowDensity) {
  Rng init(5);
  const flow::FlowStack stack(2, 2, 8, init, false);
  auto logp = [&](std::span<const double> u) {
    return stack.log_density(Matrix::row_vector(u))[0];
  };
  Rng rng(6);
  const double n_k = 1000.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> x = {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
    const double lp = logp(x);
    const std::vector<double> nk = {n_k};
    // Small radius: pointwise counts at V = Vol(B_r) match within 5%.
    const double r = 0.01;
    const double mc = mc_count_estimate(logp, x, r, 2000, rng, n_k);
    const double point = pseudo_counts(std::vector<double>{lp}, nk,
                                       Volume::from_value(ball_volume(2, r))).counts[0];
    EXPECT_NEAR(mc / point, 1.0, 0.05);
    // Square neighborhood 0.05^2 against an equal-area disk: within a factor of 2.
    const double sq = pseudo_counts(std::vector<double>{lp}, nk, Volume::from_value(0.05 * 0.05))
                          .counts[0];
    const double disk = mc_count_estimate(logp, x, 0.05 / std::sqrt(std::numbers::pi), 2000, rng, n_k);
    EXPECT_GT(disk / sq, 0.5);
    EXPECT_LT(disk / sq, 2.0);
  }
}

TEST(MonteCarlo, BatchedEstimatesMatchPointwiseEstimator) {
  Rng init(7);
  const flow::FlowStack stack(2, 2, 8, init, false);
  const std::vector<double> x = {0.2, -0.4};
  const std::vector<double> n = {300.0, 700.0};
  Rng a(3), b(3);
  const PseudoCounts batch = mc_count_estimates(
      [&](const Matrix& pts) {
        const auto lp = stack.log_density(pts);
        Matrix out(pts.rows(), 2);
        for (std::size_t i = 0; i < pts.rows(); ++i) out(i, 0) = out(i, 1) = lp[i];
        return out;
      },
      x, 0.1, 500, a, n);
  const double single = mc_count_estimate(
      [&](std::span<const double> u) { return stack.log_density(Matrix::row_vector(u))[0]; }, x,
      0.1, 500, b, 300.0);
  EXPECT_NEAR(batch.counts[0], single, 1e-12 * single);
  EXPECT_NEAR(batch.counts[1] / batch.counts[0], 700.0 / 300.0, 1e-12);
  EXPECT_EQ(batch.mode, CountMode::monte_carlo);
}

TEST(MonteCarlo, BallDrawsStayInsideBall) {
  Rng rng(4);
  const std::vector<double> c = {1.0, 2.0, 3.0};
  const Matrix d = uniform_ball_draws(c, 0.5, 2000, rng);
  double mean_r = 0.0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < 3; ++j) r2 += (d(i, j) - c[j]) * (d(i, j) - c[j]);
    EXPECT_LE(std::sqrt(r2), 0.5 + 1e-12);
    mean_r += std::sqrt(r2);
  }
  // E|u - c| = r * D / (D + 1) for a uniform ball.
  EXPECT_NEAR(mean_r / d.rows(), 0.5 * 3.0 / 4.0, 0.01);
}

}  // namespace
}  // namespace cccpde::bayes
