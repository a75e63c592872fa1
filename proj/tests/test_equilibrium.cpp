#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sybil/equilibrium.hpp"

using namespace sybil;

TEST(BestResponse, ClosedFormAndGrid) {
  EXPECT_DOUBLE_EQ(best_response_reward_game(10.0, 1.0, 2.5), 2.5);
  EXPECT_DOUBLE_EQ(best_response_reward_game(10.0, 1.0, 10.0), 0.0);
  EXPECT_DOUBLE_EQ(best_response_reward_game(10.0, 1.0, 0.0), 0.0);
  EXPECT_THROW(best_response_reward_game(10.0, 0.0, 1.0), DomainError);
  for (double y : {0.5, 1.0, 2.5, 4.0, 7.0}) {
    auto [x, v] = oracle::grid_argmax([y](double x) { return reward_game_payoff(10.0, 1.0, x, y); },
                                      0.0, 10.0, 100000);
    EXPECT_NEAR(best_response_reward_game(10.0, 1.0, y), x, 2e-4) << y;
  }
}

TEST(PureEquilibrium, PaperValues) {
  auto e2 = reward_game_pure_equilibrium(10.0, 1.0, 2);
  EXPECT_DOUBLE_EQ(e2.per_player_action, 2.5);
  EXPECT_DOUBLE_EQ(e2.per_player_payoff, 2.5);
  EXPECT_DOUBLE_EQ(e2.welfare, 5.0);
  EXPECT_NEAR(reward_game_pure_equilibrium(10.0, 1.0, 10).welfare, 1.0, 1e-12);
  EXPECT_THROW(reward_game_pure_equilibrium(10.0, 1.0, 1), DomainError);
}

TEST(PureEquilibrium, FixedPointAndScaling) {
  for (double R : {1.0, 10.0, 100.0}) {
    for (double c : {0.5, 1.0, 2.0}) {
      for (int n = 2; n <= 10; ++n) {
        auto e = reward_game_pure_equilibrium(R, c, n);
        EXPECT_NEAR(best_response_reward_game(R, c, (n - 1) * e.per_player_action), e.per_player_action, 1e-9);
        EXPECT_NEAR(e.per_player_action, R / c * (n - 1.0) / (n * n), 1e-12);
        EXPECT_NEAR(e.per_player_payoff, R / (n * n), 1e-12);
        EXPECT_NEAR(e.welfare, n * e.per_player_payoff, 1e-12);
      }
    }
  }
}

TEST(MixedEquilibrium, ExpectedPayoffMatchesEnumeration) {
  for (int n = 2; n <= 7; ++n) {
    for (double p : {0.0, 0.2, 0.5, 0.9, 1.0}) {
      for (int x = 0; x <= 5; ++x) {
        EXPECT_NEAR(reward_game_expected_payoff(10.0, 1.0, n, 2, 3, p, x),
                    oracle::mixed_payoff_enumerated(10.0, 1.0, n, 2, 3, p, x), 1e-12);
      }
    }
  }
}

namespace {

void expect_equilibrium(double R, double c, int n, const DiscreteMixedEquilibrium& eq) {
  auto value = [&](int x) { return reward_game_expected_payoff(R, c, n, eq.low, eq.high, eq.p, x); };
  double played = std::max(eq.p > 0.0 ? value(eq.low) : -numeric::kInf,
                           eq.p < 1.0 ? value(eq.high) : -numeric::kInf);
  for (int x = 0; x <= std::max(12, 4 * eq.high); ++x) {
    EXPECT_LE(value(x), played + 1e-9) << "R=" << R << " n=" << n << " x=" << x;
  }
}

} // namespace

TEST(MixedEquilibrium, SmallInstanceIsPureAtLow) {
  auto eq = reward_game_mixed_equilibrium(10.0, 1.0, 3);
  EXPECT_EQ(eq.low, 2);
  EXPECT_EQ(eq.high, 3);
  // low beats high against every mixture here, so nobody mixes
  EXPECT_FALSE(eq.interior);
  EXPECT_EQ(eq.p, 1.0);
  EXPECT_LT(eq.residual, 1e-9);
  expect_equilibrium(10.0, 1.0, 3, eq);
}

TEST(MixedEquilibrium, InteriorInstances) {
  for (auto [R, n] : std::vector<std::pair<double, int>>{{50.0, 4}, {100.0, 7}}) {
    auto eq = reward_game_mixed_equilibrium(R, 1.0, n);
    ASSERT_TRUE(eq.interior) << R << " " << n;
    EXPECT_GT(eq.p, 0.0);
    EXPECT_LT(eq.p, 1.0);
    double gap = reward_game_expected_payoff(R, 1.0, n, eq.low, eq.high, eq.p, eq.low) -
                 reward_game_expected_payoff(R, 1.0, n, eq.low, eq.high, eq.p, eq.high);
    EXPECT_LT(std::abs(gap), 1e-9);
    expect_equilibrium(R, 1.0, n, eq);
  }
}

TEST(MixedEquilibrium, PropertyNoProfitableIntegerDeviation) {
  for (double R : {5.0, 10.0, 20.0, 37.0, 64.0}) {
    for (int n = 2; n <= 8; ++n) {
      auto eq = reward_game_mixed_equilibrium(R, 1.0, n);
      EXPECT_EQ(eq.high, eq.low + 1);
      EXPECT_GE(eq.p, 0.0);
      EXPECT_LE(eq.p, 1.0);
      expect_equilibrium(R, 1.0, n, eq);
    }
  }
}

TEST(ConcaveProRata, AffineExample) {
  ProRataFunction f{[](double q) { return 10.0 - q; }, [](double) { return -1.0; }};
  auto e2 = concave_prorata_equilibrium(f, 2, 10.0);
  EXPECT_NEAR(e2.per_player_action, 2.5, 1e-9);
  EXPECT_NEAR(e2.per_player_payoff, 2.5, 1e-9);
  EXPECT_NEAR(concave_prorata_equilibrium(f, 10, 10.0).welfare, 1.0, 1e-9);
}

TEST(ConcaveProRata, SinglePlayerMaximizesF) {
  const double R = 3.0;
  ProRataFunction f{[R](double q) { return R * q * std::exp(1.0 - q); }, {}};
  auto e = concave_prorata_equilibrium(f, 1, 5.0);
  EXPECT_NEAR(e.per_player_action, oracle::golden_max(f.f, 0.0, 5.0), 1e-6);
  EXPECT_NEAR(e.per_player_payoff, R, 1e-9);
}

TEST(ConcaveProRata, RootResidualAndFixedPoint) {
  std::vector<ProRataFunction> fs{
      {[](double q) { return 10.0 - q; }, [](double) { return -1.0; }},
      {[](double q) { return std::sqrt(q) - 0.2 * q; }, [](double q) { return 0.5 / std::sqrt(q) - 0.2; }},
      {[](double q) { return q * (4.0 - q); }, {}}};
  std::vector<double> hi{10.0, 25.0, 4.0};
  for (std::size_t i = 0; i < fs.size(); ++i) {
    for (int n = 2; n <= 8; ++n) {
      auto e = concave_prorata_equilibrium(fs[i], n, hi[i]);
      double q = n * e.per_player_action;
      EXPECT_LT(std::abs((n - 1) * fs[i](q) + q * fs[i].derivative(q)), 1e-9) << i << " " << n;
      auto game = games::pro_rata(fs[i].f, ActionSpace::continuous(0.0, hi[i], 1e-3));
      auto br = best_response(game, (n - 1) * e.per_player_action, {0.0, hi[i], 1e-3, 3});
      EXPECT_NEAR(br.x, e.per_player_action, 1e-6) << i << " " << n;
    }
  }
}

TEST(ConcaveProRata, NoInteriorRootThrows) {
  ProRataFunction f{[](double q) { return q; }, [](double) { return 1.0; }};
  EXPECT_THROW(concave_prorata_equilibrium(f, 3, 5.0), NumericFailure);
}

TEST(Dynamics, ConvergesToCournotEquilibrium) {
  auto g = games::cournot(1.0, 1e-3);
  for (int n = 1; n <= 6; ++n) {
    DynamicsOptions opts;
    opts.search = {0.0, 1.0, 1e-3, 4};
    auto r = symmetric_best_response_dynamics(g, n, 0.1, opts);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.action, 1.0 / (n + 1), 1e-6) << n;
  }
}

TEST(PriceOfAnarchy, RewardGameGrowsLikeN) {
  auto g = games::reward_share(10.0, 1.0, 10.0, 1e-3);
  for (int n = 2; n <= 10; ++n) {
    auto poa = price_of_anarchy(g, n, reward_game_pure_equilibrium(10.0, 1.0, n).welfare);
    EXPECT_NEAR(poa.poa, n, 0.05 * n);
    EXPECT_DOUBLE_EQ(poa.optimal_action, 1e-3);
  }
  EXPECT_THROW(price_of_anarchy(g, 3, 0.0), DomainError);
}

TEST(PriceOfAnarchy, SinglePlayerAtOptimum) {
  auto g = games::cournot(1.0, 1e-3);
  auto poa = price_of_anarchy(g, 1, 0.25);
  EXPECT_NEAR(poa.poa, 1.0, 1e-12);
}
