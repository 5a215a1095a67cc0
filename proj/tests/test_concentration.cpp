#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "saa4pde/concentration.hpp"

using namespace saa4pde;

namespace {
ConcentrationOptions opts(std::size_t n = 100000, std::uint64_t seed = 7, unsigned threads = 1) {
  ConcentrationOptions o;
  o.n_mc = n;
  o.seed = seed;
  o.threads = threads;
  return o;
}
}  // namespace

TEST(Samplers, MeanZeroWithinFourSigma) {
  const std::size_t n = 40000;
  for (const auto& w : {rademacher_scalar(), bounded_sphere(8, 2.0), truncated_gaussian(8, 1.0)}) {
    UniformSampler rng(11);
    std::vector<double> sum(w.dim, 0.0), sq(w.dim, 0.0), x(w.dim);
    for (std::size_t i = 0; i < n; ++i) {
      w.draw(rng, x);
      for (std::size_t k = 0; k < w.dim; ++k) {
        sum[k] += x[k];
        sq[k] += x[k] * x[k];
      }
    }
    for (std::size_t k = 0; k < w.dim; ++k) {
      const double mean = sum[k] / n;
      const double sd = std::sqrt(sq[k] / n - mean * mean);
      EXPECT_LE(std::abs(mean), 4.0 * sd / std::sqrt(double(n))) << w.name << " component " << k;
    }
  }
}

TEST(Samplers, NormsRespectTheirSupport) {
  UniformSampler rng(3);
  auto sphere = bounded_sphere(8, 1.5);
  auto tg = truncated_gaussian(8, 1.0, 2.5);
  std::vector<double> x(8);
  for (int i = 0; i < 2000; ++i) {
    sphere.draw(rng, x);
    EXPECT_NEAR(detail::norm_of(x), 1.5, 1e-12);
    tg.draw(rng, x);
    EXPECT_LE(detail::norm_of(x), 2.5);
  }
  EXPECT_THROW(bounded_sphere(0), std::invalid_argument);
}

TEST(CoshCondition, RademacherPassesAtEveryLambda) {
  const auto rows = check_cosh_condition(rademacher_scalar(), default_lambda_grid(), opts());
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.verdict, Verdict::pass) << r.parameter;
    EXPECT_LE(r.empirical, r.bound);
  }
  // |Z| = 1 surely, so the estimate is exact
  EXPECT_NEAR(rows[2].empirical, std::cosh(1.0), 1e-12);
}

TEST(CoshCondition, BoundedSamplerPasses) {
  for (double radius : {0.5, 1.0, 3.0}) {
    const auto rows =
        check_cosh_condition(bounded_sphere(8, radius), default_lambda_grid(), opts(20000));
    EXPECT_TRUE(all_passed(rows)) << radius;
  }
}

TEST(CoshCondition, UnderstatedTauFailsAtLargeLambda) {
  const auto rows = check_cosh_condition(with_tau(rademacher_scalar(), 0.5),
                                         default_lambda_grid(), opts());
  EXPECT_EQ(rows.back().verdict, Verdict::fail);
  EXPECT_NEAR(rows.back().empirical, std::cosh(4.0), 1e-9);
  EXPECT_NEAR(rows.back().bound, std::exp(2.0), 1e-12);
  EXPECT_FALSE(all_passed(rows));
}

TEST(CoshCondition, OverflowIsSkipped) {
  const std::vector<double> big{1000.0};
  const auto rows = check_cosh_condition(rademacher_scalar(), big, opts(10000));
  EXPECT_EQ(rows[0].verdict, Verdict::skipped);
  EXPECT_FALSE(rows[0].note.empty());
  EXPECT_THROW(check_cosh_condition(rademacher_scalar(), big, opts(100)), std::invalid_argument);
}

TEST(SubgaussianEquivalence, RademacherValue) {
  const auto row = check_subgaussian_equivalence(rademacher_scalar(), opts());
  const double sigma2 = 2.0 / (1.0 - std::exp(-2.0));
  EXPECT_NEAR(sigma2, 2.3130, 1e-4);
  EXPECT_NEAR(row.empirical, std::exp(1.0 / sigma2), 1e-10);
  EXPECT_NEAR(row.empirical, 1.541, 1e-3);
  EXPECT_EQ(row.bound, std::numbers::e);
  EXPECT_EQ(row.verdict, Verdict::pass);
}

TEST(SubgaussianEquivalence, OtherSamplersPass) {
  EXPECT_EQ(check_subgaussian_equivalence(bounded_sphere(8, 2.0), opts(20000)).verdict,
            Verdict::pass);
  EXPECT_EQ(check_subgaussian_equivalence(truncated_gaussian(), opts(20000)).verdict,
            Verdict::pass);
}

TEST(SubgaussianEquivalence, ConverseDirection) {
  const auto tg = truncated_gaussian(8, 1.0);
  // the claimed exp-square parameter holds
  UniformSampler rng(5);
  std::vector<double> x(8);
  double s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    tg.draw(rng, x);
    const double r = detail::norm_of(x);
    s += std::exp(r * r / (*tg.sigma * *tg.sigma));
  }
  EXPECT_LE(s / n, std::numbers::e * mc_slack(n));
  const auto rows = check_cosh_from_exp_square(tg, default_lambda_grid(), opts());
  EXPECT_TRUE(all_passed(rows));
  EXPECT_THROW(check_cosh_from_exp_square(rademacher_scalar(), default_lambda_grid(), opts()),
               std::invalid_argument);
}

TEST(SumMgf, RademacherSumOfFour) {
  const std::vector<double> l{1.0};
  const auto rows = sum_mgf_check(rademacher_scalar(), l, 4, opts());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].bound, std::exp(3.0), 1e-12);
  // E cosh(S_4) = cosh(1)^4
  EXPECT_NEAR(rows[0].empirical, std::pow(std::cosh(1.0), 4), 0.05);
  EXPECT_EQ(rows[0].verdict, Verdict::pass);
}

TEST(SumMgf, AllSamplersPass) {
  const std::vector<double> l{0.25, 0.5, 1.0};
  for (const auto& w : {rademacher_scalar(), bounded_sphere(8, 1.0), truncated_gaussian()})
    EXPECT_TRUE(all_passed(sum_mgf_check(w, l, 8, opts(20000)))) << w.name;
  EXPECT_THROW(sum_mgf_check(rademacher_scalar(), l, 0, opts()), std::invalid_argument);
}

TEST(Maxima, SingleScalarMean) {
  const auto rows = maxima_bounds_experiment(rademacher_scalar(), 1, 1, {}, opts());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].bound, std::sqrt(1.5) * std::sqrt(2.0 * std::log(2.0)), 1e-12);
  EXPECT_NEAR(rows[0].bound, 1.4421, 1e-4);
  EXPECT_EQ(rows[0].empirical, 1.0);
  EXPECT_EQ(rows[0].verdict, Verdict::pass);
}

TEST(Maxima, TailBoundsHoldAndVacuousOnesAreMarked) {
  const std::vector<double> eps{0.1, 0.5, 1.0, 1.5};
  for (const auto& w : {rademacher_scalar(), bounded_sphere(8, 1.0)}) {
    const auto rows = maxima_bounds_experiment(w, 4, 16, eps, opts(20000));
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_TRUE(all_passed(rows)) << w.name;
    EXPECT_EQ(rows[1].note, "vacuous bound");  // eps = 0.1 gives 2K e^{-0.053} > 1
    EXPECT_LT(rows[4].bound, 1.0);
    for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_LE(rows[i].empirical, rows[i - 1].empirical);
  }
}

TEST(Maxima, MeanBoundDecaysLikeRootN) {
  const auto a = maxima_bounds_experiment(bounded_sphere(8, 1.0), 8, 4, {}, opts(5000));
  const auto b = maxima_bounds_experiment(bounded_sphere(8, 1.0), 8, 16, {}, opts(5000));
  EXPECT_NEAR(a[0].bound / b[0].bound, 2.0, 1e-12);
  EXPECT_NEAR(a[0].empirical / b[0].empirical, 2.0, 0.15);
}

TEST(Concentration, ThreadCountDoesNotChangeResults) {
  const auto a = sum_mgf_check(truncated_gaussian(), default_lambda_grid(), 3, opts(20000, 9, 1));
  const auto b = sum_mgf_check(truncated_gaussian(), default_lambda_grid(), 3, opts(20000, 9, 4));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].empirical, b[i].empirical);
}

TEST(Verdicts, SlackBands) {
  const double slack = mc_slack(10000);
  EXPECT_DOUBLE_EQ(slack, 1.03);
  EXPECT_EQ(judge(1.0, 1.0, slack), Verdict::pass);
  EXPECT_EQ(judge(1.03, 1.0, slack), Verdict::pass);
  EXPECT_EQ(judge(1.05, 1.0, slack), Verdict::flagged);
  EXPECT_EQ(judge(1.07, 1.0, slack), Verdict::fail);
  EXPECT_EQ(judge(INFINITY, 1.0, slack), Verdict::skipped);
}

TEST(Verdicts, CsvLayout) {
  const auto rows = check_cosh_condition(rademacher_scalar(), {1.0}, opts(10000));
  std::ostringstream out;
  write_check_csv(rows, out);
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("check,parameter,empirical,bound,slack,verdict\n", 0), 0u);
  EXPECT_NE(s.find("cosh_condition,rademacher lambda=1,"), std::string::npos);
  EXPECT_NE(s.find(",pass\n"), std::string::npos);
}
