#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "saa4pde/bounds.hpp"
#include "support.hpp"

using namespace saa4pde;

namespace {

// every structural constant 1, c_q = 0, d_q = 1, p = 4, ||y_d|| = 0
ProblemConstants all_ones() { return ProblemConstants{}; }

}  // namespace

TEST(Planner, HandEvaluatedValues) {
  const auto c = all_ones();
  EXPECT_EQ(lipschitz_grad(c), 9.0);
  const auto cr = compact_radius(c);
  EXPECT_EQ(cr.diameter, 2.0);
  EXPECT_EQ(cr.radius, 8.0);
  EXPECT_EQ(tau_scripted(c), 4.0);
  EXPECT_EQ(*sample_size_expectation(1.0, 1.0, 1.0, 1.0, 1.0, 2, 1.0).value, 142);
  EXPECT_EQ(*sample_size_tail(1.0, 1.0, 1.0, 1.0, 0.0, 2, 1.0, 2.0 / std::numbers::e).value, 48);
}

TEST(Planner, DegenerateCases) {
  auto c = all_ones();
  c.g_max.value = 0.0;
  EXPECT_EQ(lipschitz_grad(c), 0.0);
  EXPECT_EQ(compact_radius(c).radius, 0.0);

  c = all_ones();
  c.kappa_min.value = 0.0;
  EXPECT_THROW(lipschitz_grad(c), std::invalid_argument);

  c = all_ones();
  c.yd_norm.value = 0.75;
  EXPECT_EQ(compact_radius(c).diameter, 2.75);

  // rho = 0 leaves only the leading factor
  const double expected = 12.0 * std::numbers::ln2 * 9.0 / 0.25;
  EXPECT_EQ(*sample_size_expectation(3.0, 5.0, 7.0, 0.1, 0.0, 2, 0.5).value,
            static_cast<std::int64_t>(std::ceil(expected)));
}

TEST(Planner, TauScaling) {
  auto c = all_ones();
  c.b_max.value = 0.0;
  const double t1 = tau_scripted(c);
  c.g_max.value = 2.0;
  EXPECT_DOUBLE_EQ(tau_scripted(c), 4.0 * t1);
  c = all_ones();
  double previous = INFINITY;
  for (double k : {1.0, 10.0, 1e3, 1e6}) {
    c.kappa_min.value = k;
    const double t = tau_scripted(c);
    EXPECT_LT(t, previous);
    previous = t;
  }
  EXPECT_LT(previous, 1e-10);
}

TEST(Planner, LipschitzNondecreasingInFeasibleRadius) {
  auto c = all_ones();
  c.c_q.value = 0.5;
  double previous = 0.0;
  for (int k = 0; k <= 50; ++k) {
    c.r_ad.value = 0.2 * k;
    const double l = lipschitz_grad(c);
    EXPECT_GE(l, previous);
    previous = l;
  }
}

TEST(Planner, SampleSizesAreMonotone) {
  const double tau = 2.0, lip = 3.0, rad = 5.0, alpha = 0.5, rho = 1.0;
  const auto ne = [&](double t, double l, double r, double a, double p, int d, double e) {
    return sample_size_expectation(t, l, r, a, p, d, e).bound;
  };
  const auto nt = [&](double t, double l, double r, double a, double p, int d, double e,
                      double dl) { return sample_size_tail(t, l, r, a, p, d, e, dl).bound; };
  for (double eps : {0.05, 0.1, 0.5, 1.0}) {
    EXPECT_GE(ne(tau, lip, rad, alpha, rho, 2, eps), ne(tau, lip, rad, alpha, rho, 2, 2 * eps));
    EXPECT_LE(ne(tau, lip, rad, alpha, rho, 2, eps), ne(2 * tau, lip, rad, alpha, rho, 2, eps));
    EXPECT_LE(ne(tau, lip, rad, alpha, rho, 2, eps), ne(tau, 2 * lip, rad, alpha, rho, 2, eps));
    EXPECT_LE(ne(tau, lip, rad, alpha, rho, 2, eps), ne(tau, lip, 2 * rad, alpha, rho, 2, eps));
    EXPECT_LE(ne(tau, lip, rad, alpha, rho, 2, eps), ne(tau, lip, rad, alpha / 2, rho, 2, eps));
    EXPECT_LE(ne(tau, lip, rad, alpha, rho, 2, eps), ne(tau, lip, rad, alpha, 2 * rho, 2, eps));
    EXPECT_LE(ne(tau, lip, rad, alpha, rho, 2, eps), ne(tau, lip, rad, alpha, rho, 3, eps));
    for (double delta : {0.01, 0.1, 0.5}) {
      const double base = nt(tau, lip, rad, alpha, rho, 2, eps, delta);
      EXPECT_GE(base, nt(tau, lip, rad, alpha, rho, 2, eps, 2 * delta * 0.99));
      EXPECT_GE(base, nt(tau, lip, rad, alpha, rho, 2, 2 * eps, delta));
      EXPECT_LE(base, nt(2 * tau, lip, rad, alpha, rho, 2, eps, delta));
      EXPECT_LE(base, nt(tau, 2 * lip, rad, alpha, rho, 2, eps, delta));
      EXPECT_LE(base, nt(tau, lip, 2 * rad, alpha, rho, 2, eps, delta));
      EXPECT_LE(base, nt(tau, lip, rad, alpha / 2, rho, 2, eps, delta));
      EXPECT_LE(base, nt(tau, lip, rad, alpha, 2 * rho, 2, eps, delta));
      EXPECT_LE(base, nt(tau, lip, rad, alpha, rho, 3, eps, delta));
    }
    // halving eps at least quadruples the requirement
    const auto n1 = sample_size_expectation(tau, lip, rad, alpha, rho, 2, eps);
    const auto n2 = sample_size_expectation(tau, lip, rad, alpha, rho, 2, eps / 2);
    EXPECT_GE(*n2.value, 4 * *n1.value - 1);
  }
}

TEST(Planner, TailGrowthExponent) {
  // log-log slope of N(eps) in 1/eps approaches d + 2 for small eps
  for (int d : {2, 3}) {
    const double e1 = 1e-4, e2 = 5e-5;
    const double n1 = sample_size_tail(1.0, 2.0, 3.0, 1.0, 1.0, d, e1, 0.1).bound;
    const double n2 = sample_size_tail(1.0, 2.0, 3.0, 1.0, 1.0, d, e2, 0.1).bound;
    const double slope = std::log(n2 / n1) / std::log(e1 / e2);
    EXPECT_NEAR(slope, d + 2.0, 0.05 * (d + 2.0));
  }
}

TEST(Planner, InvalidArguments) {
  EXPECT_THROW(sample_size_expectation(1, 1, 1, 1, 1, 2, 0.0), std::invalid_argument);
  EXPECT_THROW(sample_size_tail(1, 1, 1, 1, 1, 2, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(sample_size_tail(1, 1, 1, 1, 1, 2, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(sample_size_tail(1, 1, 1, 1, 1, 2, -1.0, 0.5), std::invalid_argument);
  auto c = all_ones();
  c.p.value = 3.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = all_ones();
  c.d.value = 3.0;
  c.p.value = 7.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.p.value = 6.0;
  EXPECT_NO_THROW(c.validate());
  c.alpha.value = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Planner, CeilingToleratesRoundingNoise) {
  EXPECT_EQ(*ceil_sample_size(48.0000000000001).value, 48);
  EXPECT_EQ(*ceil_sample_size(47.9999999999999).value, 48);
  EXPECT_EQ(*ceil_sample_size(48.001).value, 49);
  EXPECT_TRUE(ceil_sample_size(1e19).astronomical());
  EXPECT_TRUE(ceil_sample_size(INFINITY).astronomical());
  EXPECT_EQ(ceil_sample_size(1e19).str(), "astronomical");
  EXPECT_EQ(ceil_sample_size(1e19).bound, 1e19);
}

TEST(Curve, Properties) {
  const std::vector<double> ns{2, 4, 8, 16, 32, 64, 128, 1024};
  const auto curve = expectation_bound_curve(4.0, 9.0, 8.0, 1e-1, 1.0, 2, ns);
  ASSERT_EQ(curve.size(), ns.size());
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i].bound, curve[i - 1].bound);
  for (double alpha : {1e-3, 1e-2, 1e-1}) {
    const auto a = expectation_bound_curve(4.0, 9.0, 8.0, alpha, 1.0, 2, ns);
    const auto b = expectation_bound_curve(4.0, 9.0, 8.0, 10 * alpha, 1.0, 2, ns);
    for (std::size_t i = 0; i < ns.size(); ++i) EXPECT_GE(a[i].bound, 10.0 * b[i].bound * (1 - 1e-12));
  }
  // rho = 0: the optimum sits at the small-eps end of the grid
  for (double n : {4.0, 100.0}) {
    const auto c0 = expectation_bound_curve(2.0, 1.0, 1.0, 0.5, 0.0, 2, {n});
    const double limit = std::sqrt(3.0) * 2.0 * std::sqrt(std::numbers::ln2) / (0.5 * std::sqrt(n));
    EXPECT_NEAR(c0[0].bound, limit, 1e-3 * limit);
  }
  EXPECT_THROW(expectation_bound_curve(1, 1, 1, 1, 1, 2, {}), std::invalid_argument);
}

TEST(Constants, ClosedForms) {
  EXPECT_NEAR(friedrichs_constant(2), 0.225079, 1e-6);
  EXPECT_NEAR(friedrichs_constant(3), 0.183776, 1e-6);
  for (int d : {2, 3})
    EXPECT_NEAR(std::pow(friedrichs_constant(d), 2) * d * std::numbers::pi * std::numbers::pi, 1.0,
                1e-14);
  EXPECT_NEAR(embedding_constant_p4(friedrichs_constant(2)), 0.5642, 5e-5);
  EXPECT_LT(embedding_constant_p4(0.1), embedding_constant_p4(0.2));
  EXPECT_THROW(embedding_constant_p4(0.2, 3), std::invalid_argument);
  EXPECT_NEAR(kappa_min_case_study(), 1.808e-2, 5e-5);
  EXPECT_LT(kappa_min_case_study(), 1.5);
}

TEST(Constants, FriedrichsAgainstDiscreteEigenvalue) {
  // inverse iteration for K x = lambda M x at n = 64
  const auto mesh = build_mesh(64);
  const DirichletReduction red(mesh);
  const CsrMatrix k = red.reduce(assemble_stiffness(mesh, [](const Point2&) { return 1.0; }));
  const CsrMatrix m = red.reduce(assemble_mass_p1(mesh));
  const BandedCholesky chol(k);
  Vector x(k.rows(), 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    Vector y = chol.solve(m * x);
    lambda = dot(x, k * x) / dot(x, m * x);
    const double s = std::sqrt(dot(y, m * y));
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] / s;
  }
  lambda = dot(x, k * x) / dot(x, m * x);
  EXPECT_NEAR(1.0 / std::sqrt(lambda), friedrichs_constant(2), 0.01 * friedrichs_constant(2));
}

TEST(Constants, EmbeddingHoldsForSampledFields) {
  const auto mesh = build_mesh(64);
  const FieldNorms norms(mesh);
  const double c4 = embedding_constant_p4(friedrichs_constant(2));
  const auto& rule = quad_degree4();  // exact for P1 to the fourth power
  UniformSampler s(3);
  for (int trial = 0; trial < 20; ++trial) {
    // smooth random combinations of sine modes plus a bump
    std::vector<double> a(4);
    for (double& v : a) v = s.next_symmetric();
    const double sharp = 1.0 + 50.0 * s.next_unit();
    Vector f(mesh.num_vertices());
    for (std::size_t v = 0; v < f.size(); ++v) {
      const auto& x = mesh.vertices[v];
      const double pi = std::numbers::pi;
      f[v] = a[0] * std::sin(pi * x.x1) * std::sin(pi * x.x2) +
             a[1] * std::sin(2 * pi * x.x1) * std::sin(3 * pi * x.x2) +
             a[2] * std::sin(5 * pi * x.x1) * std::sin(pi * x.x2) +
             a[3] * x.x1 * (1 - x.x1) * x.x2 * (1 - x.x2) *
                 std::exp(-sharp * ((x.x1 - 0.3) * (x.x1 - 0.3) + (x.x2 - 0.6) * (x.x2 - 0.6)));
      if (mesh.boundary_mask[v]) f[v] = 0.0;
    }
    double l4 = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
      for (std::size_t q = 0; q < rule.size(); ++q) {
        double val = 0.0;
        for (int i = 0; i < 3; ++i) val += rule.points[q][i] * f[mesh.triangles[t][i]];
        l4 += mesh.cell_area * rule.weights[q] * std::pow(val, 4);
      }
    l4 = std::pow(l4, 0.25);
    EXPECT_LE(l4, c4 * norms.h1_semi(f));
  }
}

TEST(Constants, CaseStudyDefaults) {
  const auto c = case_study_constants(1e-3);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.kappa_min.source, Provenance::closed_form);
  EXPECT_EQ(c.g_max.source, Provenance::heuristic);
  EXPECT_EQ(c.b_max.source, Provenance::heuristic);
  EXPECT_EQ(c.rho.source, Provenance::heuristic);
  EXPECT_EQ(c.r_ad.value, 10.0);
  EXPECT_EQ(c.d_q.value, 6.0);
  EXPECT_EQ(c.c_q.value, 0.0);
  EXPECT_EQ(c.p.value, 4.0);
  EXPECT_GE(c.g_max.value, 1.1);  // g >= 1
  EXPECT_GE(c.b_max.value, 1.1 * friedrichs_constant(2));  // |b| >= 1 somewhere
  EXPECT_EQ(c.g_max.value, case_study_constants(1e-3).g_max.value);
}

TEST(Plan, ProvenanceAndJsonRoundTrip) {
  auto c = all_ones();
  ProblemConstants::for_each(c, [](const char*, Constant& k) { k.source = Provenance::closed_form; });
  c.rho.source = Provenance::user;
  auto r = plan(c, 1.0, 2.0 / std::numbers::e);
  EXPECT_EQ(r.provenance, Provenance::user);
  EXPECT_EQ(r.lipschitz, 9.0);
  EXPECT_EQ(r.tau, 4.0);
  EXPECT_TRUE(r.notes.empty());

  c.g_max.source = Provenance::heuristic;
  r = plan(c, 1.0, 0.1);
  EXPECT_EQ(r.provenance, Provenance::heuristic);
  EXPECT_FALSE(r.notes.empty());

  const nlohmann::json j = r;
  const PlanResult back = nlohmann::json::parse(j.dump()).get<PlanResult>();
  EXPECT_EQ(back, r);

  const auto big = plan(case_study_constants(1e-3), 1e-3, 0.1);
  EXPECT_TRUE(big.n_expectation.astronomical());
  const PlanResult back2 = nlohmann::json::parse(nlohmann::json(big).dump()).get<PlanResult>();
  EXPECT_EQ(back2, big);
}

TEST(Plan, ReadConstants) {
  auto c = case_study_constants(1e-3);
  std::istringstream in("# constants\nkappa_min = 0.5\n\n  g_max=2 # inline\nrho = 3\n");
  c.read(in);
  EXPECT_EQ(c.kappa_min.value, 0.5);
  EXPECT_EQ(c.kappa_min.source, Provenance::user);
  EXPECT_EQ(c.g_max.value, 2.0);
  EXPECT_EQ(c.rho.source, Provenance::user);
  EXPECT_EQ(c.b_max.source, Provenance::heuristic);

  std::istringstream bad1("nope = 1\n");
  EXPECT_THROW(c.read(bad1), std::invalid_argument);
  std::istringstream bad2("kappa_min = 1x\n");
  EXPECT_THROW(c.read(bad2), std::invalid_argument);
  std::istringstream bad3("kappa_min 1\n");
  EXPECT_THROW(c.read(bad3), std::invalid_argument);
  std::istringstream bad4("kappa_min = 1 guessed\n");
  EXPECT_THROW(c.read(bad4), std::invalid_argument);
}

TEST(Plan, ConstantsWriteReadRoundTrip) {
  const auto c = case_study_constants(1e-3);
  std::stringstream io;
  c.write(io);
  ProblemConstants back;
  back.read(io);
  ProblemConstants::for_each(back, [&](const char* name, const Constant& k) {
    ProblemConstants::for_each(c, [&](const char* other, const Constant& orig) {
      if (std::string(name) != other) return;
      EXPECT_EQ(k.value, orig.value) << name;
      EXPECT_EQ(k.source, orig.source) << name;
    });
  });
  EXPECT_EQ(plan(back, 0.1, 0.05), plan(c, 0.1, 0.05));
}
