#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "alctrie/analysis.hpp"
#include "oracles.hpp"

using namespace alctrie;

TEST(ProbPoisson, Values) {
  EXPECT_EQ(prob_poisson_ge2(0.0), 0.0);
  EXPECT_NEAR(prob_poisson_ge2(1.0), 0.26424111765711533, 1e-15);
  EXPECT_NEAR(prob_poisson_ge2(50.0), 1.0, 1e-15);
  EXPECT_THROW(prob_poisson_ge2(-1.0), std::invalid_argument);
}

TEST(ProbPoisson, SmallMuIsAccurate) {
  for (double mu : {1e-12, 1e-8, 1e-5, 1e-3, 0.3, 0.6, 2.0, 7.0}) {
    const double expect = mu < 1e-3 ? mu * mu / 2 - mu * mu * mu / 3 : oracle::poisson_ge2_pmf(mu);
    EXPECT_NEAR(prob_poisson_ge2(mu) / expect, 1.0, 1e-9) << mu;
  }
}

TEST(ProbBinomial, Values) {
  EXPECT_EQ(prob_binomial_ge2(1, 0.3), 0.0);
  EXPECT_EQ(prob_binomial_ge2(0, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(prob_binomial_ge2(4, 0.5), 0.6875);
  EXPECT_DOUBLE_EQ(prob_binomial_ge2(2, 1.0), 1.0);
  EXPECT_THROW(prob_binomial_ge2(3, 1.5), std::invalid_argument);
  for (unsigned n = 2; n <= 12; ++n)
    for (double q : {1e-4, 0.01, 0.2, 0.5, 0.9})
      EXPECT_NEAR(prob_binomial_ge2(n, q), oracle::binomial_ge2_enumerated(n, q), 1e-13) << n << " " << q;
  // Tiny q: leading term C(n,2) q^2.
  EXPECT_NEAR(prob_binomial_ge2(1000, 1e-12) / (499500 * 1e-24), 1.0, 1e-6);
}

TEST(MuJ, Values) {
  EXPECT_NEAR(mu_j(1000, 10, 10, 0.7), 28.2475249, 1e-6);
  EXPECT_NEAR(mu_j(std::pow(0.7, -3) * std::pow(0.3, -4), 7, 3, 0.7), 1.0, 1e-12);
  for (std::uint32_t j = 0; j <= 9; ++j) EXPECT_NEAR(mu_j(512, 9, j, 0.5), 1.0, 1e-12);
}

TEST(ExpectedFill, FrozenValues) {
  struct Row {
    std::uint32_t k;
    double fixed, poisson;
  };
  const Row rows[] = {{8, 0.8740872390829666, 0.8740546479145388},
                      {12, 0.19012373116259468, 0.19011444359918503},
                      {16, 0.007894011762432387, 0.007894370049602438},
                      {20, 0.00011447131730644607, 0.00011448938630465655}};
  for (const Row& r : rows) {
    EXPECT_NEAR(expected_fill_fraction(ModelParams::fixed(4096, 0.7, 0.5), r.k) / r.fixed, 1.0, 1e-10);
    EXPECT_NEAR(expected_fill_fraction(ModelParams::poisson(4096, 0.7, 0.5), r.k) / r.poisson, 1.0, 1e-10);
  }
  EXPECT_NEAR(expected_fill_fraction(ModelParams::fixed(4096, 0.7, 0.5), 4), 1.0, 1e-9);
}

TEST(ExpectedFill, SmallCases) {
  for (double p : {0.1, 0.5, 0.7})
    EXPECT_NEAR(expected_fill_fraction(ModelParams::fixed(3, p, 0.5), 1), 0.5, 1e-15);
  for (std::uint64_t n : {2, 5, 100}) EXPECT_DOUBLE_EQ(expected_fill_fraction(ModelParams::fixed(n, 0.7, 0.5), 0), 1.0);
}

TEST(ExpectedFill, HalfPoissonClosedForm) {
  for (double lambda : {10.0, 1e3, 1e6})
    for (std::uint32_t k = 0; k <= 40; ++k)
      EXPECT_NEAR(expected_fill_fraction(ModelParams::poisson(lambda, 0.5, 0.5), k),
                  prob_poisson_ge2(std::ldexp(lambda, -static_cast<int>(k))), 1e-12);
}

TEST(ExpectedFill, MonotoneAndModelsAgree) {
  for (double p : {0.3, 0.5, 0.7, 0.9}) {
    double prev_fixed = 2.0, prev_poisson = 2.0;
    for (std::uint32_t k = 0; k <= 60; ++k) {
      const double f = expected_fill_fraction(ModelParams::fixed(4096, p, 0.5), k);
      const double po = expected_fill_fraction(ModelParams::poisson(4096, p, 0.5), k);
      EXPECT_LE(f, prev_fixed * (1 + 1e-12)) << p << " " << k;
      EXPECT_LE(po, prev_poisson * (1 + 1e-12)) << p << " " << k;
      EXPECT_GT(f, 0.0);
      EXPECT_LE(f, 1.0);
      if (k <= 40) EXPECT_LE(std::fabs(f - po), 0.02);
      EXPECT_LE(f, expected_fill_fraction(ModelParams::fixed(8192, p, 0.5), k) * (1 + 1e-12));
      prev_fixed = f;
      prev_poisson = po;
    }
  }
}

TEST(ExpectedFill, LargeLevelsStayFinite) {
  const double v = expected_fill_fraction(ModelParams::fixed(1 << 20, 0.7, 0.5), 4096);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GE(v, 0.0);
  EXPECT_LT(v, 1e-100);
}

TEST(ExpectedFill, SymmetricInP) {
  for (std::uint32_t k : {3U, 10U, 17U}) {
    EXPECT_NEAR(expected_fill_fraction(ModelParams::fixed(1000, 0.2, 0.5), k),
                expected_fill_fraction(ModelParams::fixed(1000, 0.8, 0.5), k), 1e-14);
    EXPECT_NEAR(expected_fill_fraction(ModelParams::poisson(1000, 0.2, 0.5), k),
                expected_fill_fraction(ModelParams::poisson(1000, 0.8, 0.5), k), 1e-14);
  }
}

TEST(Gamma, Values) {
  EXPECT_NEAR(gamma_threshold(20, std::pow(2.0, 14), 0.7), 16.96616530119659, 1e-10);
  EXPECT_NEAR(gamma_threshold(12, std::pow(0.3, -12), 0.7), 0.0, 1e-9);
  EXPECT_NEAR(gamma_threshold(12, std::pow(0.7, -12), 0.7), 12.0, 1e-9);
  EXPECT_THROW(gamma_threshold(10, 100, 0.5), std::domain_error);
}

TEST(Gamma, SolvesDefiningEquation) {
  for (double p : {0.6, 0.7, 0.9})
    for (std::uint32_t k : {10U, 20U, 30U}) {
      const double lambda = std::pow(2.0, k * 0.8);
      const double g = gamma_threshold(k, lambda, p);
      const double lhs = std::log(lambda) + g * std::log(p) + (k - g) * std::log(1 - p);
      EXPECT_NEAR(std::exp(lhs), 1.0, 1e-9);
      const auto j = static_cast<std::uint32_t>(std::ceil(g));
      if (j <= k) {
        const double mu = mu_j(lambda, k, j, p);
        EXPECT_GE(mu, 1.0 - 1e-12);
        EXPECT_LE(mu, p / (1 - p) + 1e-12);
      }
    }
}

TEST(Normal, CdfAgainstSeries) {
  for (double x = -6.0; x <= 6.0; x += 0.25) EXPECT_NEAR(normal_cdf(x), oracle::normal_cdf_series(x), 1e-9) << x;
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(1.0 - normal_cdf(2.0), 0.022750131948179195, 1e-12);
}

TEST(Normal, Quantile) {
  EXPECT_EQ(normal_quantile(0.5), 0.0);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-9);
  const double bis = oracle::bisect([](double x) { return oracle::normal_cdf_series(x) - 0.975; }, 0.0, 5.0);
  EXPECT_NEAR(normal_quantile(0.975), bis, 1e-8);
  for (double a : {1e-10, 1e-6, 0.001, 0.02, 0.1, 0.3, 0.45}) {
    EXPECT_NEAR(normal_quantile(1 - a), -normal_quantile(a), 1e-8 * std::max(1.0, std::fabs(normal_quantile(a))));
    EXPECT_NEAR(normal_cdf(normal_quantile(a)) / a, 1.0, 1e-8);
  }
  EXPECT_THROW(normal_quantile(0.0), std::domain_error);
  EXPECT_THROW(normal_quantile(1.0), std::domain_error);
}

TEST(BinomialTail, Approximation) {
  EXPECT_DOUBLE_EQ(binomial_tail_normal_approx(10, 5.0), 0.5);
  EXPECT_NEAR(binomial_tail_normal_approx(100, 60.0), 0.022750131948179195, 1e-12);
  for (std::uint32_t k : {16U, 64U, 256U})
    for (double g = 0; g <= k; g += k / 16.0)
      EXPECT_LE(std::fabs(binomial_tail_normal_approx(k, g) - oracle::binomial_half_tail(k, g)), 0.5 / std::sqrt(k));
}

TEST(Constants, Values) {
  const DerivedConstants half = derived_constants(0.5);
  EXPECT_DOUBLE_EQ(half.h, 1.0);
  EXPECT_DOUBLE_EQ(half.h_inf, 1.0);
  EXPECT_DOUBLE_EQ(half.b, 1.0);

  const DerivedConstants c = derived_constants(0.7);
  EXPECT_NEAR(c.h, 0.8812908992306927, 1e-12);
  EXPECT_NEAR(c.h, (0.7 * std::log(1 / 0.7) + 0.3 * std::log(1 / 0.3)) / std::log(2.0), 1e-14);
  EXPECT_NEAR(c.b, 1.125769383497982, 1e-12);
  EXPECT_NEAR(c.kappa, 0.7828343106048526, 1e-12);
  EXPECT_NEAR(c.h_inf, std::log2(10.0 / 3.0), 1e-14);
  EXPECT_NEAR(c.rho, 7.0 / 3.0, 1e-14);

  for (double p = 0.05; p < 0.96; p += 0.05) {
    const DerivedConstants d = derived_constants(p);
    EXPECT_LE(d.h, 1.0);
    if (std::fabs(p - 0.5) > 1e-9) {
      EXPECT_GT(d.kappa, 0.0);
      EXPECT_LT(d.kappa, 1.0);
      EXPECT_LT(depth_constant(p, LcVariant::alpha_lc), depth_constant(p, LcVariant::full_lc));
      EXPECT_NEAR(depth_constant(p, LcVariant::alpha_lc), depth_constant(1 - p, LcVariant::alpha_lc), 1e-12);
    }
  }
}

TEST(Constants, DepthConstants) {
  EXPECT_NEAR(depth_constant(0.7, LcVariant::alpha_lc), 0.4538992857710215, 1e-12);
  EXPECT_NEAR(depth_constant(0.7, LcVariant::alpha_lc), 0.4537, 5e-4);
  EXPECT_NEAR(depth_constant(0.7, LcVariant::full_lc), 0.9790149647665957, 1e-12);
  EXPECT_THROW(depth_constant(0.5, LcVariant::alpha_lc), std::domain_error);
  EXPECT_THROW(depth_constant(0.5, LcVariant::full_lc), std::domain_error);
}

TEST(ClosedForm, Values) {
  const double n = 65536;
  EXPECT_NEAR(predict_level_closed_form(n, 0.25, 0.7), 15.593019627275698, 1e-9);
  EXPECT_NEAR(predict_level_closed_form(n, 0.5, 0.7), 14.21250234242907, 1e-9);
  EXPECT_NEAR(predict_level_closed_form(n, 0.75, 0.7), 12.831985057582443, 1e-9);
  EXPECT_NEAR(predict_level_closed_form(n, 0.5, 0.7), std::log(n) / std::log(1 / std::sqrt(0.21)), 1e-12);
  for (double a : {0.1, 0.5, 0.9}) EXPECT_NEAR(predict_level_closed_form(n, a, 0.5), 16.0, 1e-12);
  EXPECT_NEAR(predict_level_closed_form(n, 0.25, 0.3), predict_level_closed_form(n, 0.25, 0.7), 1e-12);
  EXPECT_THROW(predict_level_closed_form(1.0, 0.5, 0.7), std::domain_error);
  EXPECT_THROW(predict_level_closed_form(n, 1.0, 0.7), std::domain_error);
}

TEST(Calibrated, Values) {
  struct Row {
    double alpha;
    std::uint32_t k10, k16, k20;
  };
  for (const Row& r : {Row{0.25, 9, 15, 18}, Row{0.5, 8, 13, 17}, Row{0.75, 7, 12, 15}}) {
    const std::uint32_t got[] = {predict_level_calibrated(ModelParams::fixed(1 << 10, 0.7, r.alpha)),
                                 predict_level_calibrated(ModelParams::fixed(1 << 16, 0.7, r.alpha)),
                                 predict_level_calibrated(ModelParams::fixed(1 << 20, 0.7, r.alpha))};
    EXPECT_EQ(got[0], r.k10);
    EXPECT_EQ(got[1], r.k16);
    EXPECT_EQ(got[2], r.k20);
    for (int e = 10; e <= 20; ++e) {
      const double n = std::ldexp(1.0, e);
      const auto k = predict_level_calibrated(ModelParams::fixed(static_cast<std::uint64_t>(n), 0.7, r.alpha));
      EXPECT_LE(std::fabs(k - predict_level_closed_form(n, r.alpha, 0.7)), 3.0);
      const ModelParams params = ModelParams::fixed(static_cast<std::uint64_t>(n), 0.7, r.alpha);
      EXPECT_GE(expected_fill_fraction(params, k), r.alpha);
      EXPECT_LT(expected_fill_fraction(params, k + 1), r.alpha);
    }
  }
}

TEST(Calibrated, TwoKeys) {
  for (double p : {0.1, 0.5, 0.7})
    for (double alpha : {0.5, 0.75, 0.9}) EXPECT_EQ(predict_level_calibrated(ModelParams::fixed(2, p, alpha)), 0U);
}

TEST(Calibrated, PoissonAndSymmetry) {
  EXPECT_EQ(predict_level_calibrated(ModelParams::poisson(65536, 0.3, 0.25)),
            predict_level_calibrated(ModelParams::poisson(65536, 0.7, 0.25)));
  EXPECT_THROW(predict_level_calibrated(ModelParams::fixed(1, 0.7, 0.5)), std::domain_error);
}

TEST(FullFillup, Values) {
  EXPECT_NEAR(predict_full_fillup(65536, 0.7), 8.06003299490823, 1e-10);
  EXPECT_DOUBLE_EQ(predict_full_fillup(65536, 0.3), predict_full_fillup(65536, 0.7));
  EXPECT_GT(predict_level_closed_form(65536, 0.5, 0.7), predict_full_fillup(65536, 0.7));
  EXPECT_THROW(predict_full_fillup(8, 0.7), std::domain_error);
  EXPECT_THROW(predict_full_fillup(65536, 0.5), std::domain_error);
}

TEST(ModelParams, Validate) {
  EXPECT_NO_THROW(ModelParams::fixed(10, 0.7, 0.5).validate());
  EXPECT_THROW(ModelParams::fixed(10, 0.0, 0.5).validate(), std::invalid_argument);
  EXPECT_THROW(ModelParams::fixed(10, 0.7, 0.0).validate(), std::invalid_argument);
  EXPECT_THROW(ModelParams::poisson(0.0, 0.7, 0.5).validate(), std::invalid_argument);
  EXPECT_THROW((ModelParams{0.7, 0.5, SizeModel::fixed, 2.5}).validate(), std::invalid_argument);
}
