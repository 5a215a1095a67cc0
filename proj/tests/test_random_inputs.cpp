#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "saa4pde/random_fields.hpp"
#include "saa4pde/sampling.hpp"

using namespace saa4pde;

namespace {

ParamVector zeros() {
  ParamVector xi;
  xi.fill(0.0);
  return xi;
}

}  // namespace

TEST(Fields, KappaAtZeroParameter) {
  const auto xi = zeros();
  EXPECT_DOUBLE_EQ(case_study::kappa({0.25, 0.5}, xi), 1.0);
  EXPECT_DOUBLE_EQ(case_study::kappa({0.75, 0.5}, xi), 1.5);
}

TEST(Fields, KappaLowerBoundOnGrid) {
  // The branch-1 exponent separates into x1- and x2-tables, which makes a
  // 200 x 200 grid times 10^4 parameters affordable. eval at the minimizer is
  // cross-checked against the table value.
  constexpr double pi = std::numbers::pi;
  constexpr int grid = 200;
  const double bound = case_study::kappa_min();
  EXPECT_NEAR(bound, 1.808e-2, 5e-5);
  UniformSampler sampler(2024);
  double overall = INFINITY;
  std::vector<double> s1(25 * (grid + 1)), s2(25 * (grid + 1));
  for (int trial = 0; trial < 10000; ++trial) {
    const ParamVector xi = sampler.next_param();
    for (int k = 1; k <= 25; ++k)
      for (int i = 0; i <= grid; ++i) {
        const double x = static_cast<double>(i) / grid;
        s1[(k - 1) * (grid + 1) + i] =
            5.0 / (2.0 * k * k) * std::sin(4.0 * k * xi[k - 1] * pi * x);
        s2[(k - 1) * (grid + 1) + i] = std::sin(4.0 * k * pi * xi[24 + k] * x);
      }
    double best = INFINITY;
    int bi = 0, bj = 0;
    for (int i = 0; i <= grid / 2; ++i)
      for (int j = 0; j <= grid; ++j) {
        double e = 0.0;
        for (int k = 0; k < 25; ++k) e += s1[k * (grid + 1) + i] * s2[k * (grid + 1) + j];
        if (e < best) {
          best = e;
          bi = i;
          bj = j;
        }
      }
    const Point2 x{static_cast<double>(bi) / grid, static_cast<double>(bj) / grid};
    const double kv = case_study::kappa(x, xi);
    ASSERT_NEAR(kv, std::exp(best), 1e-12 * std::exp(best));
    overall = std::min(overall, kv);
    // the other branch at a few points
    for (int j = 0; j <= grid; j += 50)
      ASSERT_GE(case_study::kappa({0.5 + 0.5 * j / grid + 1e-9, 0.3}, xi), 1.5);
  }
  EXPECT_GE(overall, bound);
}

TEST(Fields, SourceBranches) {
  auto xi = zeros();
  EXPECT_DOUBLE_EQ(case_study::b({0.5, 0.5}, xi), 1.0);
  EXPECT_DOUBLE_EQ(case_study::b({0.9, 0.5}, xi), 1.0);
  // threshold 3/4 + xi_76/2 = 1 for xi_76 = 1/2: every x1 < 1 takes branch 1
  xi[75] = 0.5;
  xi[76] = 0.3;
  const Point2 x{0.99, 0.4};
  double branch1 = 0.0;
  for (int k = 1; k <= 25; ++k)
    branch1 += 5.0 / (k * k) * xi[74 + k] * x.x1 * x.x2 *
               std::cos(4.0 * std::numbers::pi * k * x.x1) *
               std::sin(4.0 * std::numbers::pi * k * x.x2);
  EXPECT_NEAR(case_study::b(x, xi), 1.0 + branch1, 1e-14);
}

TEST(Fields, GainIsAtLeastOne) {
  EXPECT_EQ(case_study::g({0.3, 0.7}, zeros()), 1.0);
  UniformSampler sampler(99);
  for (int i = 0; i < 100000; ++i) {
    const ParamVector xi = sampler.next_param();
    const Point2 x{sampler.next_unit(), sampler.next_unit()};
    const double g = case_study::g(x, xi);
    ASSERT_GE(g, 1.0);
    ASSERT_TRUE(std::isfinite(g));
    ASSERT_TRUE(std::isfinite(case_study::b(x, xi)));
    ASSERT_GT(case_study::kappa(x, xi), 0.0);
  }
}

TEST(Fields, Target) {
  EXPECT_EQ(case_study::yd({0.5, 0.5}), -1.0);
  EXPECT_EQ(case_study::yd({0.1, 0.1}), 1.0);
  EXPECT_EQ(case_study::yd({0.25, 0.75}), -1.0);  // closed square
  EXPECT_EQ(case_study::yd({0.76, 0.5}), 1.0);
}

TEST(Uniform, DeterministicAndSeedSensitive) {
  UniformSampler a(5), b(5), c(6);
  const auto la = draw_uniform(a, 4);
  const auto lb = draw_uniform(b, 4);
  const auto lc = draw_uniform(c, 4);
  EXPECT_EQ(la, lb);
  EXPECT_NE(la[0], lc[0]);
  EXPECT_EQ(a.position(), 400u);
  for (const auto& xi : la) EXPECT_TRUE(in_parameter_box(xi));
  EXPECT_THROW(draw_uniform(a, 0), std::invalid_argument);
}

TEST(Uniform, ComponentMeans) {
  UniformSampler s(17);
  const auto draws = draw_uniform(s, 100000);
  for (std::size_t j = 0; j < kParamDim; ++j) {
    double m = 0.0;
    for (const auto& xi : draws) m += xi[j];
    EXPECT_LT(std::abs(m / draws.size()), 0.02) << "component " << j;
  }
}

TEST(Uniform, KolmogorovSmirnov) {
  // two-sided KS at level 1e-3: D_n <= sqrt(ln(2/alpha)/2) / sqrt(n)
  UniformSampler s(123);
  std::vector<double> x(100000);
  for (double& v : x) v = s.next_symmetric();
  std::sort(x.begin(), x.end());
  double d = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = (x[i] + 1.0) / 2.0;
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  EXPECT_LE(d, std::sqrt(std::log(2.0 / 1e-3) / 2.0) / std::sqrt(n));
}

TEST(Sobol, FirstPointsAndTransform) {
  SobolGenerator gen(1);
  EXPECT_EQ(gen.next()[0], 0.0);
  EXPECT_EQ(gen.next()[0], 0.5);
  EXPECT_EQ(gen.next()[0], 0.75);
  EXPECT_EQ(gen.next()[0], 0.25);
  const auto params = sobol_parameters(3);
  EXPECT_EQ(params[0][0], 0.0);  // 2 * 0.5 - 1
  EXPECT_EQ(params[1][0], 0.5);
  EXPECT_EQ(params[2][0], -0.5);
}

TEST(Sobol, MatchesPublishedVectors) {
  // unscrambled Joe-Kuo Sobol points (index, dimension) -> value
  SobolGenerator gen(100);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i <= 1024; ++i) pts.push_back(gen.next());
  const std::vector<std::array<double, 5>> expected{
      {0.5, 0.5, 0.5, 0.5, 0.5},          {0.75, 0.25, 0.25, 0.75, 0.75},
      {0.25, 0.75, 0.75, 0.25, 0.25},     {0.375, 0.375, 0.625, 0.375, 0.875},
      {0.875, 0.875, 0.125, 0.875, 0.375}, {0.625, 0.125, 0.875, 0.625, 0.125},
      {0.125, 0.625, 0.375, 0.125, 0.625}, {0.1875, 0.3125, 0.9375, 0.0625, 0.9375}};
  const int dims[5] = {0, 1, 2, 49, 99};
  for (int i = 1; i <= 8; ++i)
    for (int k = 0; k < 5; ++k)
      EXPECT_EQ(pts[i][dims[k]], expected[i - 1][k]) << "i=" << i << " dim=" << dims[k];
  EXPECT_EQ(pts[1024][99], 0.35791015625);
  EXPECT_EQ(pts[1000][37], 0.8310546875);
}

TEST(Sobol, ElementaryIntervals) {
  // the first 32 points (origin included) fill every [j/32, (j+1)/32) once
  SobolGenerator gen(kParamDim);
  std::vector<std::vector<double>> block;
  for (int i = 0; i < 32; ++i) block.push_back(gen.next());
  for (std::size_t d = 0; d < kParamDim; ++d) {
    std::set<int> cells;
    for (const auto& p : block) cells.insert(static_cast<int>(p[d] * 32));
    EXPECT_EQ(cells.size(), 32u) << "dimension " << d;
  }
  // two-dimensional nets on the leading pair: 4 x 8 boxes each hold one point
  std::set<int> boxes;
  for (const auto& p : block) boxes.insert(static_cast<int>(p[0] * 4) * 8 + static_cast<int>(p[1] * 8));
  EXPECT_EQ(boxes.size(), 32u);
}

TEST(Sobol, DimensionLimit) {
  EXPECT_THROW(SobolGenerator(101), std::out_of_range);
  EXPECT_NO_THROW(SobolGenerator(100));
}

TEST(Sobol, DataFileMatchesEmbeddedTable) {
  std::ifstream in(SAA4PDE_DATA_DIR "/new-joe-kuo-100.txt");
  ASSERT_TRUE(in.good());
  const auto from_file = parse_direction_numbers(in);
  const auto embedded = default_direction_numbers();
  ASSERT_EQ(from_file.size(), 99u);
  ASSERT_EQ(from_file.size(), embedded.size());
  for (std::size_t i = 0; i < embedded.size(); ++i) {
    EXPECT_EQ(from_file[i].dimension, embedded[i].dimension);
    EXPECT_EQ(from_file[i].coefficients, embedded[i].coefficients);
    EXPECT_EQ(from_file[i].initial, embedded[i].initial);
  }
  std::istringstream bad("2 3 1 1 3\n");
  EXPECT_THROW(parse_direction_numbers(bad), std::runtime_error);
}
