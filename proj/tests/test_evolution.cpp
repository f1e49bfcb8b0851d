#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "scop/evolution.hpp"
#include "test_support.hpp"

using namespace scop;
using scop::testing::rel;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST(EvolutionRhs, FixedEndpointsGiveZero) {
  const auto w = scop::testing::three_node_fixed();
  const auto s = direct_state(w, 3, 0.0);
  const auto d = evolution_rhs(s, node_data(w, 0.0));
  for (double v : d.pack()) EXPECT_EQ(v, 0.0);
}

TEST(EvolutionRhs, TranslationShiftsOnlyB) {
  // every node moving with unit speed
  const auto w = make_weight({0.5, 0.8, 1.2}, {1.0, 2.0}, EndpointTrajectory::affine(std::vector<double>{-1.0, 0.2, 1.0},
                                                                                    std::vector<double>{1.0, 1.0, 1.0}));
  const auto s = direct_state(w, 4, 0.0);
  const auto d = evolution_rhs(s, node_data(w, 0.0));
  EXPECT_NEAR(d.a, 0.0, 1e-10);
  EXPECT_NEAR(d.b, 1.0, 1e-10);
  EXPECT_NEAR(d.gamma / s.gamma, 0.0, 1e-10);
  EXPECT_LE(max_abs(d.theta), 1e-10 * max_abs(s.theta));
  EXPECT_LE(max_abs(d.theta_prev), 1e-10 * max_abs(s.theta_prev));
  EXPECT_LE(max_abs(d.omega), 1e-10 * max_abs(s.omega));

  // independent check: the recomputed table for the translated weight
  const auto later = direct_state(w, 4, 0.25);
  EXPECT_NEAR(later.b, s.b + 0.25, 1e-12);
  EXPECT_LE(rel(later.a, s.a), 1e-12);
}

TEST(EvolutionRhs, DilationScalesA) {
  // xdot_k = x_k at t=0 via x_k(t) = x_k (1 + t)
  const std::vector<double> x0{-1.0, 0.2, 1.0};
  const auto w = make_weight({0.5, 0.8, 1.2}, {1.0, 2.0}, EndpointTrajectory::affine(x0, x0));
  const auto s = direct_state(w, 4, 0.0);
  const auto d = evolution_rhs(s, node_data(w, 0.0));
  EXPECT_NEAR(d.a / s.a, 1.0, 1e-10);
  EXPECT_NEAR(d.b, s.b, 1e-10);

  const auto later = direct_state(w, 4, 0.5);
  EXPECT_LE(rel(later.a, 1.5 * s.a), 1e-12);
}

TEST(EvolutionRhs, RejectsUnorderedNodes) {
  const auto w = scop::testing::three_node_fixed();
  const auto s = direct_state(w, 2, 0.0);
  NodeData nd = node_data(w, 0.0);
  std::swap(nd.x[0], nd.x[1]);
  EXPECT_THROW(evolution_rhs(s, nd), error);
}

TEST(Evolve, FixedEndpointsKeepStateConstant) {
  const auto w = scop::testing::three_node_fixed();
  const auto rep = evolve(w, 3, 0.0, 2.0);
  const auto y0 = rep.samples.front().pack();
  for (const auto& s : rep.samples) {
    const auto y = s.pack();
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], y0[i], 1e-12 * std::max(1.0, std::abs(y0[i])));
  }
}

TEST(Evolve, TwoNodeTranslation) {
  const auto w = make_weight({0.5, 0.5}, {1.0}, EndpointTrajectory::affine(std::vector<double>{-1.0, 1.0},
                                                                          std::vector<double>{1.0, 1.0}));
  const auto rep = evolve(w, 4, 0.0, 1.0);
  const auto& first = rep.samples.front();
  const auto& last = rep.samples.back();
  EXPECT_NEAR(last.b, first.b + 1.0, 1e-8);
  EXPECT_NEAR(last.a, first.a, 1e-8);
}

TEST(Evolve, ThreeNodeAgainstDirectRecomputation) {
  const auto w = scop::testing::three_node_moving();
  const auto rep = evolve(w, 5, 0.0, 0.3);
  const auto direct = direct_state(w, 5, 0.3);
  EXPECT_LE(rel(rep.samples.back().a, direct.a), 1e-6);
  EXPECT_LE(std::abs(rep.samples.back().b - direct.b), 1e-6);
  EXPECT_LE(rep.max_step_drift, 1e-8);
  EXPECT_EQ(rep.samples.size(), 20u);
  EXPECT_DOUBLE_EQ(rep.samples.back().t, 0.3);
}

TEST(Evolve, ReprojectionKeepsSumsExact) {
  const auto w = scop::testing::three_node_moving();
  EvolveOptions opts;
  opts.reproject = true;
  opts.rtol = 1e-7;
  const auto rep = evolve(w, 3, 0.0, 0.3, opts);
  for (const auto& d : rep.drift) EXPECT_LE(d.max_abs(), 1e-12);
}

TEST(Evolve, EndpointCollisionIsReported) {
  const auto w = scop::testing::three_node_moving();
  try {
    evolve(w, 3, 0.0, 1.5);
    FAIL() << "expected EndpointCollision";
  } catch (const integration_failure& e) {
    EXPECT_EQ(e.code(), errc::endpoint_collision);
    EXPECT_LT(e.last_t(), 1.0);
    EXPECT_GT(e.last_t(), 0.99);
  }
}

TEST(Evolve, RequiresPositiveExponents) {
  const auto w = make_weight({0.0, 0.5}, {1.0}, EndpointTrajectory::affine(std::vector<double>{-1.0, 1.0},
                                                                          std::vector<double>{0.0, 1.0}));
  try {
    evolve(w, 2, 0.0, 1.0);
    FAIL() << "expected InitFailure";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::init_failure);
  }
}

TEST(VerifyAgainstDirect, DeviationsSmallAndZeroAtStart) {
  const auto w = scop::testing::three_node_moving();
  const auto rep = evolve(w, 5, 0.0, 0.3);
  const auto rows = verify_against_direct(w, 5, rep);
  ASSERT_EQ(rows.size(), rep.samples.size());
  EXPECT_LE(rows.front().max(), 1e-12);
  for (const auto& r : rows) EXPECT_LE(r.max(), 1e-6) << r.t;
}

TEST(VerifyAgainstDirect, DeviationGrowsWithTolerance) {
  const auto w = scop::testing::three_node_moving();
  double prev = 0.0;
  for (double rtol : {1e-10, 1e-8, 1e-6}) {
    EvolveOptions opts;
    opts.rtol = rtol;
    opts.atol = rtol * 1e-3;
    const auto rows = verify_against_direct(w, 5, evolve(w, 5, 0.0, 0.3, opts));
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, r.max());
    EXPECT_GT(worst, prev) << rtol;
    prev = worst;
  }
}

TEST(TimeDerivative, FixedEndpointsVanish) {
  const auto w = scop::testing::three_node_fixed();
  const auto tab = stieltjes_procedure(w, 0.0, 3);
  const auto c = pn_time_derivative_check(w, tab, 3, 0.37, 0.0, 1e-4);
  EXPECT_NEAR(c.fd_off_node, 0.0, 1e-10);
  EXPECT_NEAR(c.formula_off_node, 0.0, 1e-14);
}

TEST(TimeDerivative, FormulaMatchesFiniteDifference) {
  const auto w = scop::testing::three_node_moving();
  const double t = 0.1;
  const auto tab = stieltjes_procedure(w, t, 3);
  const auto c = pn_time_derivative_check(w, tab, 3, 0.37, t, 1e-4);
  EXPECT_LE(c.off_node, 1e-5);
  EXPECT_LE(c.at_node, 1e-5);
}

TEST(TimeDerivative, ResidualIsSecondOrderInH) {
  const auto w = scop::testing::three_node_moving();
  const double t = 0.1;
  const auto tab = stieltjes_procedure(w, t, 3);
  const auto c1 = pn_time_derivative_check(w, tab, 3, 0.37, t, 1e-2);
  const auto c2 = pn_time_derivative_check(w, tab, 3, 0.37, t, 5e-3);
  EXPECT_NEAR(std::log2(c1.off_node / c2.off_node), 2.0, 0.1);
  EXPECT_NEAR(std::log2(c1.at_node / c2.at_node), 2.0, 0.1);
}

// The flow right-hand side is the t-derivative of the directly recomputed state.
TEST(EvolutionProperty, RhsMatchesCenteredDifferenceToSecondOrder) {
  const auto w = scop::testing::three_node_moving();
  const double t0 = 0.1;
  const int n = 5;
  const auto rhs = evolution_rhs(direct_state(w, n, t0), node_data(w, t0)).pack();
  std::vector<double> errs;
  for (double h : {1e-3, 5e-4}) {
    const auto p = direct_state(w, n, t0 + h).pack();
    const auto m = direct_state(w, n, t0 - h).pack();
    double e = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) e = std::max(e, std::abs((p[i] - m[i]) / (2 * h) - rhs[i]));
    errs.push_back(e);
  }
  EXPECT_GE(std::log2(errs[0] / errs[1]), 1.9);
}

// The five leading-coefficient sums are preserved along a generic flow.
TEST(EvolutionProperty, ConservedSumsAlongQuadraticTrajectory) {
  const auto w = make_weight({0.4, 1.1, 0.6, 0.9}, {1.0, 0.5, 2.0},
                             EndpointTrajectory({{-1.5, 0.2}, {-0.4, 0.5, -0.3}, {0.3, -0.2}, {1.2, 0.0, 0.4}}));
  const auto rep = evolve(w, 4, 0.0, 0.5);
  EXPECT_LE(rep.max_step_drift, 1e-8);
  for (const auto& s : rep.samples) {
    EXPECT_GT(s.a, 0.0);
    EXPECT_GT(s.gamma, 0.0);
  }
  const auto rows = verify_against_direct(w, 4, rep);
  for (const auto& r : rows) EXPECT_LE(r.max(), 1e-6) << r.t;
}
