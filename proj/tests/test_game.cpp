#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sybil/game.hpp"

using namespace sybil;

namespace {

AggregativeGame intro_game() { return games::participation(10.0); }

std::vector<AggregativeGame> registered_games() {
  return {games::participation(10.0),
          games::reward_share(10.0, 1.0, 10.0, 0.1),
          games::pro_rata([](double q) { return 10.0 - q; }, ActionSpace::continuous(0.0, 10.0, 0.1)),
          games::cournot(1.0, 0.05),
          games::exponential(5.0, 0.05),
          games::product_form([](double x) { return std::sqrt(x); }, [](double q) { return std::exp(-q); },
                              ActionSpace::continuous(0.0, 4.0, 0.1)),
          games::second_price(1.0, 2.0, 0.05)};
}

} // namespace

TEST(SybilPayoff, IntroductionNumbers) {
  auto cost = SybilCost::linear(0.1);
  EXPECT_NEAR(sybil_payoff(intro_game(), cost, {1.0}, {1.0, 1.0, 1.0}), 2.4, 1e-12);
  EXPECT_NEAR(sybil_payoff(intro_game(), cost, {1.0, 1.0}, {1.0, 1.0, 1.0}), 3.8, 1e-12);
}

TEST(SybilPayoff, SingleIdentityAgainstNobody) {
  auto g = games::cournot(1.0);
  EXPECT_DOUBLE_EQ(sybil_payoff(g, SybilCost::linear(0.01), {0.3}, {}), 0.3 * 0.7 - 0.01);
}

TEST(SybilPayoff, RejectsInactiveAndInadmissibleIdentities) {
  auto cost = SybilCost::zero();
  EXPECT_THROW(sybil_payoff(intro_game(), cost, {0.0}, {1.0}), DomainError);
  EXPECT_THROW(sybil_payoff(intro_game(), cost, {0.5}, {1.0}), DomainError);
  EXPECT_THROW(sybil_payoff(intro_game(), cost, {1.0}, {2.0}), DomainError);
  EXPECT_THROW(sybil_payoff(intro_game(), cost, SybilStrategy{}, std::vector<double>{}), DomainError);
  try {
    sybil_payoff(intro_game(), cost, {1.0, 7.0}, {1.0});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("mine[1]"), std::string::npos);
  }
}

TEST(MergedPayoff, EvaluatesAggregate) {
  auto g = games::reward_share(10.0, 0.0, 10.0, 1.0);
  SybilStrategy mine{{1.0, 1.0}};
  std::vector<double> foreign{1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(merged_payoff(g, SybilCost::zero(), mine, foreign), 4.0);
}

TEST(MergedPayoff, OneIdentityEqualsSybilPayoff) {
  auto g = games::exponential();
  auto cost = SybilCost::linear(0.2);
  SybilStrategy mine{{0.7}};
  std::vector<double> foreign{0.4, 1.1};
  EXPECT_DOUBLE_EQ(merged_payoff(g, cost, mine, foreign), sybil_payoff(g, cost, mine, foreign));
}

TEST(MergedPayoff, AuctionsMergeByMax) {
  auto g = games::second_price(1.0, 2.0, 0.05);
  SybilStrategy mine{{0.3, 0.8}};
  std::vector<double> foreign{0.5};
  EXPECT_DOUBLE_EQ(merged_payoff(g, SybilCost::zero(), mine, foreign), g(0.8, 0.5));
}

TEST(MergedPayoff, NonMonoidGameIsUnsupported) {
  SybilStrategy mine{{1.0, 1.0}};
  std::vector<double> foreign{1.0};
  EXPECT_THROW(merged_payoff(intro_game(), SybilCost::zero(), mine, foreign), UnsupportedOperation);
}

TEST(Verifier, IntroductionGameHasCounterexample) {
  auto v = verify_sybilproof(intro_game(), SybilCost::zero(), 2, {{1.0, 1.0, 1.0}});
  ASSERT_FALSE(v.proof());
  EXPECT_EQ(v.counterexample->mine, (std::vector<double>{1.0, 1.0}));
  EXPECT_NEAR(v.counterexample->gain, 1.5, 1e-12);
}

TEST(Verifier, ProRataGamesAreSybilProof) {
  for (auto f : std::vector<std::function<double(double)>>{
           [](double q) { return 10.0 - q; }, [](double q) { return q * std::exp(-q); },
           [](double q) { return std::sqrt(q); }}) {
    auto g = games::pro_rata(f, ActionSpace::continuous(0.0, 3.0, 0.25));
    auto v = verify_sybilproof(g, SybilCost::zero(), 3, {{}, {0.5}, {1.0, 2.0}});
    EXPECT_TRUE(v.proof());
    EXPECT_GT(v.strategies_checked, 0u);
  }
}

TEST(Verifier, CournotIsSybilProofAtZeroCost) {
  auto g = games::cournot(1.0, 0.05);
  auto v = verify_sybilproof(g, SybilCost::zero(), 3, {{1.0 / 3.0}});
  EXPECT_TRUE(v.proof());
  EXPECT_DOUBLE_EQ(v.resolution, 0.05e-3);
}

TEST(Verifier, UnboundedSpaceNeedsSearchBound) {
  AggregativeGame g{"unbounded", [](double x, double y) { return x / (x + y + 1.0); },
                    ActionSpace{ActionKind::continuous, 0.0, numeric::kInf, 0.1}};
  EXPECT_THROW(verify_sybilproof(g, SybilCost::zero(), 2, {{}}), ConfigError);
  VerifierOptions opts;
  opts.search_upper = 1.0;
  EXPECT_NO_THROW(verify_sybilproof(g, SybilCost::zero(), 2, {{}}, opts));
  EXPECT_THROW(verify_sybilproof(intro_game(), SybilCost::zero(), 1, {{}}), ConfigError);
}

TEST(Verifier, BudgetRestrictsStrategies) {
  BudgetedGame g{games::pro_rata([](double q) { return 10.0 - q; }, ActionSpace::integer(0.0, 4.0)), 2.0};
  auto v = verify_sybilproof(g, SybilCost::zero(), 3, {{1.0}});
  EXPECT_TRUE(v.proof());
  // only (1, 1) fits the budget among >= 2 positive integer-grid identities
  EXPECT_EQ(v.strategies_checked, 1u);
  EXPECT_TRUE(g.admits(SybilStrategy{{1.0, 1.0}}));
  EXPECT_FALSE(g.admits(SybilStrategy{{2.0, 1.0}}));
}

// ---------------------------------------------------------------------------------------------
// properties

TEST(Property, ZeroActionEarnsZero) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (const auto& g : registered_games()) {
    for (int i = 0; i < 100; ++i) EXPECT_EQ(g(0.0, u(gen)), 0.0) << g.name;
  }
}

TEST(Property, ProRataMergingIsNeutral) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  std::uniform_int_distribution<int> parts(1, 6);
  std::vector<std::function<double(double)>> fs{[](double q) { return 10.0 - q; },
                                                [](double q) { return q * std::exp(-q); },
                                                [](double q) { return std::log1p(q); }};
  for (const auto& f : fs) {
    auto g = games::pro_rata(f, ActionSpace::continuous(0.0, 20.0, 0.01));
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> a(static_cast<std::size_t>(parts(gen)));
      for (auto& x : a) x = u(gen);
      std::vector<double> foreign{u(gen), u(gen)};
      double split = sybil_payoff(g, SybilCost::zero(), SybilStrategy{a}, foreign);
      double merged = merged_payoff(g, SybilCost::zero(), SybilStrategy{a}, foreign);
      EXPECT_NEAR(split, merged, 1e-12);
    }
  }
}

TEST(Property, CostIsMonotone) {
  for (const auto& cost : {SybilCost::zero(), SybilCost::linear(0.3), SybilCost::single_identity_only()}) {
    for (int y = 0; y < 5; ++y) {
      for (int x = 1; x < 10; ++x) EXPECT_LE(cost(x, y), cost(x + 1, y));
      EXPECT_GE(cost(1, y), 0.0);
    }
  }
}

TEST(Property, CounterexamplesReplay) {
  VerifierOptions opts;
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  int found = 0;
  for (int trial = 0; trial < 20; ++trial) {
    double R = u(gen), c = u(gen) * 0.1;
    // non-mergeable per-identity reward: splitting pays when c is small
    AggregativeGame g{"per_identity",
                      [R](double x, double y) { return x == 0.0 ? 0.0 : R * x / (x + y + 1.0); },
                      ActionSpace::integer(0.0, 3.0), Aggregation::sum, false};
    auto cost = SybilCost::linear(c);
    std::vector<std::vector<double>> foreign{{1.0}, {2.0, 1.0}};
    auto v = verify_sybilproof(g, cost, 3, foreign, opts);
    if (v.proof()) continue;
    ++found;
    const auto& ce = *v.counterexample;
    double sv = sybil_payoff(g, cost, SybilStrategy{ce.mine}, ce.foreign);
    double single = best_single_payoff(g, cost, ce.foreign, opts).value;
    EXPECT_GT(sv - single, opts.tolerance);
    EXPECT_DOUBLE_EQ(sv - single, ce.gain);
  }
  EXPECT_GT(found, 0);
}

TEST(Property, ProhibitiveCostCollapsesToBaseGame) {
  VerifierOptions opts;
  opts.search_upper = 3.0;
  for (const auto& g : registered_games()) {
    auto small = g;
    small.space.grid_step = std::max(small.space.grid_step, 0.25);
    auto v = verify_sybilproof(small, SybilCost::single_identity_only(), 3, {{}, {1.0}}, opts);
    EXPECT_TRUE(v.proof()) << g.name;
  }
}
