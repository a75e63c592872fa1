#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sybil/numeric.hpp"

using namespace sybil;

TEST(Bisect, FindsSqrtTwo) {
  auto r = numeric::bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0);
  EXPECT_NEAR(r.x, std::sqrt(2.0), 1e-12);
  EXPECT_LE(r.iterations, 200);
}

TEST(Bisect, EndpointRootReturnedImmediately) {
  auto r = numeric::bisect([](double x) { return x - 1.0; }, 1.0, 3.0);
  EXPECT_EQ(r.x, 1.0);
  EXPECT_EQ(r.iterations, 0);
}

TEST(Bisect, NoSignChangeThrows) {
  EXPECT_THROW(numeric::bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0), NumericFailure);
}

TEST(Integrate, PolynomialsAreExact) {
  EXPECT_NEAR(numeric::integrate([](double x) { return x * x * x; }, 0.0, 2.0), 4.0, 1e-12);
  EXPECT_NEAR(numeric::integrate([](double x) { return 3.0 * x * x; }, 1.0, 0.0), -1.0, 1e-12);
  EXPECT_EQ(numeric::integrate([](double x) { return x; }, 0.5, 0.5), 0.0);
}

TEST(Integrate, MatchesFixedStepSimpsonOnRandomSmoothIntegrands) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    double a = u(gen), b = u(gen), c = u(gen);
    auto f = [=](double x) { return a * std::exp(-b * x) * std::sin(c * x) + std::pow(1.0 + x, a); };
    double hi = u(gen);
    EXPECT_NEAR(numeric::integrate(f, 0.0, hi), oracle::simpson(f, 0.0, hi), 1e-9) << trial;
  }
}

TEST(Integrate, EndpointSingularDerivative) {
  for (double a : {0.1, 0.5, 0.9}) {
    for (double hi : {0.3, 1.0, 2.5}) {
      double exact = std::pow(hi, a + 1.0) / (a + 1.0);
      EXPECT_NEAR(numeric::integrate([a](double x) { return std::pow(x, a); }, 0.0, hi), exact, 1e-8) << a << " " << hi;
    }
  }
}

TEST(GridMaximize, RefinementReachesGoldenSection) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 40; ++trial) {
    double peak = u(gen);
    auto f = [peak](double x) { return -std::cosh(4.0 * (x - peak)); };
    auto m = numeric::grid_maximize(f, {0.0, 1.0, 0.01, 3});
    // final step is 1e-5; the refined argmax sits within one step of the peak
    EXPECT_NEAR(m.x, oracle::golden_max(f, 0.0, 1.0), 1e-5) << trial;
    EXPECT_GE(m.value, f(oracle::golden_max(f, 0.0, 1.0)) - 1e-8);
  }
}

TEST(GridMaximize, TiesGoToSmallerArgument) {
  auto m = numeric::grid_maximize([](double) { return 1.0; }, {0.0, 1.0, 0.1, 0});
  EXPECT_EQ(m.x, 0.0);
}

TEST(GridMaximize, UpperEndpointIsSearched) {
  auto m = numeric::grid_maximize([](double x) { return x; }, {0.0, 1.05, 0.1, 0});
  EXPECT_EQ(m.x, 1.05);
}

TEST(GridPoints, RejectsAbsurdGrids) {
  EXPECT_THROW(numeric::grid_points(0.0, 1e9, 1e-3), ConfigError);
  EXPECT_THROW(numeric::grid_points(0.0, numeric::kInf, 1.0), ConfigError);
  EXPECT_THROW(numeric::grid_points(0.0, 1.0, 0.0), ConfigError);
}

TEST(CentralDifference, CubicDerivative) {
  EXPECT_NEAR(numeric::central_difference([](double x) { return x * x * x; }, 2.0, 1e-5), 12.0, 1e-8);
}
