#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "dirac_billiard/boundary_law.hpp"
#include "oracles.hpp"

using namespace dirac_billiard;

TEST(Grid, EndpointsAndSpacing) {
  const Grid g(5);
  EXPECT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.25);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[4], 1.0);
  EXPECT_DOUBLE_EQ(g[2], 0.5);
  const Grid odd(1001);
  EXPECT_EQ(odd[1000], 1.0);
  EXPECT_THROW(Grid(2), DomainError);
}

TEST(BoundaryPosition, Examples) {
  EXPECT_EQ(boundary_position(BoundaryLaw(LinearWall{0.5, 1.0}), 2.0), 2.0);
  EXPECT_EQ(boundary_position(BoundaryLaw(StaticWall{1.0}), 7.3), 1.0);
  EXPECT_NEAR(boundary_position(BoundaryLaw(BreathingWall{1.0, 0.1, 2.0 * kPi}), 0.25), 1.1, 1e-15);
}

TEST(BoundaryVelocity, Examples) {
  EXPECT_EQ(boundary_velocity(BoundaryLaw(LinearWall{0.5, 1.0}), 0.0), 0.5);
  EXPECT_EQ(boundary_velocity(BoundaryLaw(LinearWall{0.5, 1.0}), 3.7), 0.5);
  EXPECT_EQ(boundary_velocity(BoundaryLaw(StaticWall{1.0}), 4.0), 0.0);
  EXPECT_NEAR(boundary_velocity(BoundaryLaw(BreathingWall{1.0, 0.1, 2.0 * kPi}), 0.0),
              0.6283185307179586, 1e-15);
}

TEST(BoundaryLaw, RejectsSuperluminalAndCollapsingWalls) {
  EXPECT_THROW(BoundaryLaw(LinearWall{1.0, 1.0}), SuperluminalWall);
  EXPECT_THROW(BoundaryLaw(LinearWall{-1.2, 1.0}, 0.1), SuperluminalWall);
  EXPECT_THROW(BoundaryLaw(LinearWall{0.5, 0.0}), InvalidLaw);
  EXPECT_THROW(BoundaryLaw(BreathingWall{1.0, 0.5, 3.0}), SuperluminalWall);
  EXPECT_THROW(BoundaryLaw(BreathingWall{1.0, 1.0, 0.1}), InvalidLaw);
  EXPECT_THROW(BoundaryLaw(StaticWall{-1.0}), InvalidLaw);
}

TEST(BoundaryLaw, ContractingWallReportsCollapseTime) {
  // L = 2 - 0.5 t hits zero at t = 4.
  try {
    BoundaryLaw law(LinearWall{-0.5, 2.0});
    FAIL() << "unbounded contracting wall accepted";
  } catch (const InvalidLaw& e) {
    EXPECT_NE(std::string(e.what()).find("t = 4"), std::string::npos) << e.what();
  }
  const BoundaryLaw ok(LinearWall{-0.5, 2.0}, 3.9);
  EXPECT_DOUBLE_EQ(*ok.collapse_time(), 4.0);
  EXPECT_NEAR(boundary_position(ok, 3.9), 0.05, 1e-15);
  EXPECT_THROW(boundary_position(ok, 3.95), OutOfRange);
}

TEST(BoundaryLaw, TabulatedValidation) {
  EXPECT_THROW(BoundaryLaw(TabulatedWall{{0.0, 1.0, 1.0}, {1.0, 1.1, 1.2}}), InvalidLaw);
  EXPECT_THROW(BoundaryLaw(TabulatedWall{{0.0, 1.0}, {1.0, 2.5}}), SuperluminalWall);
  EXPECT_THROW(BoundaryLaw(TabulatedWall{{0.5, 1.0}, {1.0, 1.1}}), OutOfRange);
  EXPECT_THROW(BoundaryLaw(TabulatedWall{{0.0, 2.0}, {1.0, -0.1}}), InvalidLaw);
  const BoundaryLaw law(TabulatedWall{{0.0, 1.0, 2.0}, {1.0, 1.5, 1.25}});
  EXPECT_EQ(law.horizon(), 2.0);
  EXPECT_DOUBLE_EQ(boundary_position(law, 0.5), 1.25);
  EXPECT_DOUBLE_EQ(boundary_position(law, 1.5), 1.375);
  EXPECT_THROW(boundary_position(law, 2.5), OutOfRange);
}

TEST(BoundaryVelocity, TabulatedReproducesLinearRate) {
  for (int samples : {5, 17, 65}) {
    const double h = 3.0 / (samples - 1);
    TabulatedWall tab;
    for (int i = 0; i < samples; ++i) {
      tab.times.push_back(i * h);
      tab.lengths.push_back(-0.2 * i * h + 1.0);
    }
    const BoundaryLaw law(tab);
    for (double t : {0.0, 0.3, 1.7, 3.0}) {
      EXPECT_LE(std::abs(boundary_velocity(law, t) + 0.2), h * h) << "samples " << samples;
    }
  }
}

TEST(BoundaryVelocity, TabulatedSmoothLawConvergesAtSecondOrderAtNodes) {
  // L = 1 + 0.2 sin t sampled at spacing h; centered differences at the
  // interior nodes carry an h^2 error.
  double prev = 0.0;
  for (int samples : {21, 41, 81}) {
    const double h = 2.0 / (samples - 1);
    TabulatedWall tab;
    for (int i = 0; i < samples; ++i) {
      tab.times.push_back(i * h);
      tab.lengths.push_back(1.0 + 0.2 * std::sin(i * h));
    }
    const BoundaryLaw law(tab);
    const double t = 1.0;  // a node for every refinement
    const double err = std::abs(boundary_velocity(law, t) - 0.2 * std::cos(t));
    if (prev > 0.0) {
      EXPECT_NEAR(std::log2(prev / err), 2.0, 0.1);
    }
    prev = err;
  }
}

TEST(RescaledTime, LinearClosedForm) {
  const BoundaryLaw law(LinearWall{0.5, 1.0});
  EXPECT_NEAR(rescaled_time(law, 2.0).tau, 2.0 * std::log(2.0), 1e-15);
  EXPECT_EQ(rescaled_time(law, 0.0).tau, 0.0);
  EXPECT_NEAR(rescaled_time(BoundaryLaw(LinearWall{1e-8, 1.0}), 1.0).tau, 1.0, 1e-8);
  EXPECT_EQ(rescaled_time(BoundaryLaw(BreathingWall{1.0, 0.1, 2.0}), 0.0).tau, 0.0);
}

TEST(RescaledTime, ClosedFormMatchesQuadrature) {
  for (double a : {0.1, -0.1, 0.5, -0.5, 0.9}) {
    for (double b : {0.5, 1.0, 2.0}) {
      const double horizon = a < 0.0 ? std::min(3.0, 0.99 * (-b / a)) : 3.0;
      const BoundaryLaw law(LinearWall{a, b}, horizon);
      for (int i = 1; i <= 10; ++i) {
        const double t = horizon * i / 10.0;
        const double c = rescaled_time(law, t).tau;
        const double q = rescaled_time_quadrature(law, t).tau;
        EXPECT_LE(std::abs(c - q), 1e-10 * std::abs(c)) << "a=" << a << " b=" << b << " t=" << t;
      }
    }
  }
}

TEST(RescaledTime, BreathingMatchesSimpsonOracle) {
  const BoundaryLaw law(BreathingWall{1.2, 0.3, 2.5}, 7.0);
  for (double t : {0.4, 2.6, 7.0}) {
    const double ref = oracle::simpson([](double s) { return 1.0 / (1.2 * (1.0 + 0.3 * std::sin(2.5 * s))); },
                                       0.0, t, 20000);
    EXPECT_NEAR(rescaled_time(law, t).tau, ref, 1e-11 * ref);
  }
}

TEST(RescaledTime, MonotoneForEveryLawKind) {
  const std::vector<BoundaryLaw> laws{
      BoundaryLaw(StaticWall{0.7}, 5.0), BoundaryLaw(LinearWall{-0.15, 1.0}, 5.0),
      BoundaryLaw(BreathingWall{1.0, 0.4, 2.0}, 5.0),
      BoundaryLaw(TabulatedWall{{0.0, 2.0, 5.0}, {1.0, 2.5, 0.5}})};
  for (const auto& law : laws) {
    double prev = 0.0;
    for (int i = 1; i <= 50; ++i) {
      const double tau = rescaled_time(law, 0.1 * i).tau;
      EXPECT_GT(tau, prev);
      prev = tau;
    }
  }
}

TEST(RescaledTime, TabulatedIsExactPiecewiseLogarithm) {
  const BoundaryLaw law(TabulatedWall{{0.0, 2.0, 5.0}, {1.0, 2.5, 0.5}});
  // Segment slopes 0.75 and -2/3.
  const double tau2 = std::log(2.5) / 0.75;
  const double tau5 = tau2 + std::log(0.5 / 2.5) / (-2.0 / 3.0);
  EXPECT_NEAR(rescaled_time(law, 2.0).tau, tau2, 1e-12 * tau2);
  EXPECT_NEAR(rescaled_time(law, 5.0).tau, tau5, 1e-12 * tau5);
}

TEST(BoundaryLaw, OutOfHorizonQueriesThrow) {
  const BoundaryLaw law(BreathingWall{1.0, 0.1, 1.0}, 2.0);
  EXPECT_THROW(boundary_position(law, 2.5), OutOfRange);
  EXPECT_THROW(boundary_velocity(law, -0.1), OutOfRange);
  EXPECT_THROW(rescaled_time(law, 3.0), OutOfRange);
}
