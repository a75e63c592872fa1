#pragma once

// Two-phase Sybil-commitment games. Players first commit to a number of identities; every
// identity then plays the symmetric equilibrium of the game with that many players.

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "sybil/equilibrium.hpp"
#include "sybil/error.hpp"
#include "sybil/game.hpp"
#include "sybil/numeric.hpp"

namespace sybil::commitment {

struct EqPayoffOracle {
  std::string name;
  /// Per-identity payoff at the selected (symmetric) equilibrium with n identities.
  std::function<double(int)> payoff;
  /// Total welfare with n identities; n * payoff(n) when left empty.
  std::function<double(int)> welfare_fn;
  /// Phase-2 total of a holder running `own` of the `total` identities; own * payoff(total) when
  /// left empty.
  std::function<double(int, int)> holder_fn;
  std::string warning;

  double welfare(int n) const { return welfare_fn ? welfare_fn(n) : n * payoff(n); }

  double holder(int own, int total) const {
    return holder_fn ? holder_fn(own, total) : own * payoff(total);
  }
};

struct CommitmentInstance {
  EqPayoffOracle oracle;
  SybilCost cost;
  int n_players = 1;

  void validate() const {
    if (n_players < 1) throw DomainError("CommitmentInstance: n_players must be >= 1");
  }
};

struct CommitmentChoice {
  int x = 1;
  double value = 0.0;
};

/// Committed value of x identities against `foreign` others.
inline double commitment_value(const CommitmentInstance& inst, int x, int foreign) {
  return inst.oracle.holder(x, x + foreign) - inst.cost(x, foreign);
}

/// argmax over 1 <= x <= x_max of the committed value, ties toward smaller x.
inline CommitmentChoice commitment_best_response(const CommitmentInstance& inst, int foreign,
                                                 int x_max = 32) {
  if (x_max < 1) throw ConfigError("commitment_best_response: x_max must be >= 1");
  if (foreign < 0) throw DomainError("commitment_best_response: foreign must be >= 0");
  CommitmentChoice best{1, commitment_value(inst, 1, foreign)};
  for (int x = 2; x <= x_max; ++x) {
    double v = commitment_value(inst, x, foreign);
    if (v > best.value) best = {x, v};
  }
  return best;
}

struct ScpCounterexample {
  int foreign = 0;
  int x = 0;
  double single_value = 0.0;
  double value = 0.0;
};

struct ScpVerdict {
  std::optional<ScpCounterexample> counterexample;
  /// Smallest observed margin of x = 1 over the best x >= 2.
  double margin = numeric::kInf;

  bool scp() const { return !counterexample.has_value(); }
};

/// Margin of x = 1 over every x in [2, x_max] at one foreign count; a counterexample when the
/// margin is not above tolerance.
inline std::optional<ScpCounterexample> scp_check_at(const CommitmentInstance& inst, int foreign,
                                                     int x_max, double tolerance, double* margin) {
  const double single = commitment_value(inst, 1, foreign);
  double best_multi = -numeric::kInf;
  for (int x = 2; x <= x_max; ++x) best_multi = std::max(best_multi, commitment_value(inst, x, foreign));
  const double m = single == best_multi ? 0.0 : single - best_multi;
  if (margin) *margin = m;
  if (m > tolerance) return std::nullopt;
  auto br = commitment_best_response(inst, foreign, x_max);
  if (br.x == 1) br = {2, commitment_value(inst, 2, foreign)}; // tie at the top
  return ScpCounterexample{foreign, br.x, single, br.value};
}

/// Committing one identity must beat every x in [2, x_max] by more than tolerance, for every
/// foreign count in [0, foreign_max]. The counterexample reports the best response.
inline ScpVerdict scp_check(const CommitmentInstance& inst, int foreign_max, int x_max = 32,
                            double tolerance = 1e-12) {
  if (foreign_max < 0 || x_max < 2) throw ConfigError("scp_check: bad bounds");
  ScpVerdict verdict;
  for (int k = 0; k <= foreign_max; ++k) {
    double margin = 0.0;
    verdict.counterexample = scp_check_at(inst, k, x_max, tolerance, &margin);
    verdict.margin = std::min(verdict.margin, margin);
    if (verdict.counterexample) return verdict;
  }
  return verdict;
}

/// (n-1) R / 2^{n-2} + c n^2 / 2.
inline double theorem_bound(int n, double reward, double unit_cost) {
  if (n < 2) throw DomainError("theorem_bound: n must be >= 2");
  return std::ldexp((n - 1) * reward, 2 - n) + unit_cost * n * n / 2.0;
}

namespace oracles {

/// Linear inverse demand alpha - Q with marginal cost c_prod: payoff(n) = beta^2 / (n+1)^2.
inline EqPayoffOracle cournot(double alpha, double c_prod) {
  if (!(c_prod < alpha)) throw DomainError("cournot_oracle: degenerate market (c_prod >= alpha)");
  const double beta = alpha - c_prod;
  return {"cournot",
          [beta](int n) {
            if (n < 1) throw DomainError("cournot_oracle: n must be >= 1");
            return beta * beta / ((n + 1.0) * (n + 1.0));
          },
          {}, {}, {}};
}

/// Arbitrage against a constant-product pool with reserves (a, b): buying t of the pool's
/// input returns g(t) = b t / (a + t), worth g(t) - p t at external price p. n arbitrageurs
/// share pro rata.
inline EqPayoffOracle cfmm_arbitrage(double reserve_a, double reserve_b, double ext_price) {
  if (!(reserve_a > 0.0) || !(reserve_b > 0.0) || !(ext_price > 0.0)) {
    throw DomainError("cfmm_arbitrage_oracle: reserves and price must be > 0");
  }
  if (!(reserve_b / reserve_a > ext_price)) {
    return {"cfmm", [](int) { return 0.0; }, {}, {}, "no arbitrage: g'(0) <= external price"};
  }
  ProRataFunction f{
      [=](double t) { return reserve_b * t / (reserve_a + t) - ext_price * t; },
      [=](double t) { return reserve_b * reserve_a / ((reserve_a + t) * (reserve_a + t)) - ext_price; }};
  const double q_hi = reserve_b / ext_price - reserve_a;
  return {"cfmm",
          [f, q_hi](int n) {
            if (n < 1) throw DomainError("cfmm_arbitrage_oracle: n must be >= 1");
            return concave_prorata_equilibrium(f, n, q_hi).per_player_payoff;
          },
          {}, {}, {}};
}

/// phi(x, y) = 2 x e^{-(x+y)}: each identity plays 1, so payoff(n) = 2 e^{-n}.
inline EqPayoffOracle exponential() {
  return {"exp", [](int n) { return 2.0 * std::exp(-static_cast<double>(n)); }, {}, {}, {}};
}

/// Cost l e^{-(l+k)}, under which the committed value is l e^{-(l+k)}.
inline SybilCost exponential_cost() {
  return {[](int l, int k) { return l * std::exp(-static_cast<double>(l + k)); }, std::nullopt};
}

/// Every player is paid 3c/2 in total, however many identities it holds.
inline EqPayoffOracle trivial(double c) {
  return {"trivial", [c](int) { return 1.5 * c; }, {},
          [c](int own, int) { return own >= 1 ? 1.5 * c : 0.0; }, {}};
}

/// Identities share r_max: payoff(n) = r_max(n) / n = R / 2^{n-1}.
inline EqPayoffOracle rmax_split(double reward) {
  return {"rmax", [reward](int n) { return std::ldexp(reward, 1 - n); }, {}, {}, {}};
}

} // namespace oracles

} // namespace sybil::commitment
