#pragma once

// Symmetric equilibria and price of anarchy for aggregative games.

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "sybil/error.hpp"
#include "sybil/game.hpp"
#include "sybil/numeric.hpp"

namespace sybil {

struct SymmetricEquilibrium {
  double per_player_action = 0.0;
  double per_player_payoff = 0.0;
  int n = 0;
  double welfare = 0.0;
};

struct DiscreteMixedEquilibrium {
  int low = 0;
  int high = 1;
  /// Probability of playing `low`.
  double p = 0.0;
  int n = 0;
  /// True when p was found strictly inside (0, 1) by the indifference condition.
  bool interior = false;
  /// Equilibrium residual: |E[U(low)] - E[U(high)]| when interior; for a boundary (pure)
  /// equilibrium, the amount by which the unplayed action beats the played one (>= 0).
  double residual = 0.0;
};

/// Best response in the reward game U(x, y) = R x / (x + y) - c x over x >= 0.
/// At y = 0 the supremum R is approached as x -> 0+ but not attained; we return 0.
inline double best_response_reward_game(double reward, double unit_cost, double others) {
  if (!(unit_cost > 0.0)) throw DomainError("best_response_reward_game: cost must be > 0");
  if (!(reward > 0.0)) throw DomainError("best_response_reward_game: reward must be > 0");
  if (!(others >= 0.0)) throw DomainError("best_response_reward_game: y must be >= 0");
  if (others == 0.0) return 0.0;
  return std::max(0.0, std::sqrt(reward * others / unit_cost) - others);
}

inline double reward_game_payoff(double reward, double unit_cost, double x, double y) {
  if (x == 0.0) return 0.0;
  return reward * x / (x + y) - unit_cost * x;
}

/// Symmetric pure equilibrium of the continuous reward game.
inline SymmetricEquilibrium reward_game_pure_equilibrium(double reward, double unit_cost, int n) {
  if (n < 2) throw DomainError("reward_game_pure_equilibrium: n must be >= 2");
  if (!(unit_cost > 0.0) || !(reward > 0.0)) {
    throw DomainError("reward_game_pure_equilibrium: reward and cost must be > 0");
  }
  const double nn = static_cast<double>(n);
  const double action = reward / unit_cost * (nn - 1.0) / (nn * nn);
  const double payoff = reward_game_payoff(reward, unit_cost, action, (nn - 1.0) * action);
  return {action, payoff, n, nn * payoff};
}

/// E[U(x, Y)] where Y is the sum of n-1 independent draws from {low w.p. p, high w.p. 1-p}.
inline double reward_game_expected_payoff(double reward, double unit_cost, int n, int low,
                                          int high, double p, double x) {
  const int others = n - 1;
  double total = 0.0;
  double binom = 1.0; // C(others, j)
  for (int j = 0; j <= others; ++j) {
    if (j > 0) binom = binom * (others - j + 1) / j;
    double prob = binom * std::pow(p, j) * std::pow(1.0 - p, others - j);
    if (prob == 0.0) continue;
    double y = static_cast<double>(j * low + (others - j) * high);
    total += prob * reward_game_payoff(reward, unit_cost, x, y);
  }
  return total;
}

/// Symmetric equilibrium of the integer reward game mixing floor and floor + 1 of the
/// continuous equilibrium action.
inline DiscreteMixedEquilibrium reward_game_mixed_equilibrium(double reward, double unit_cost,
                                                              int n) {
  if (n < 2) throw DomainError("reward_game_mixed_equilibrium: n must be >= 2");
  if (!(unit_cost > 0.0) || !(reward > 0.0)) {
    throw DomainError("reward_game_mixed_equilibrium: reward and cost must be > 0");
  }
  const double nn = static_cast<double>(n);
  DiscreteMixedEquilibrium eq;
  eq.n = n;
  eq.low = static_cast<int>(std::floor(reward / unit_cost * (nn - 1.0) / (nn * nn)));
  eq.high = eq.low + 1;

  auto gap = [&](double p) {
    return reward_game_expected_payoff(reward, unit_cost, n, eq.low, eq.high, p, eq.low) -
           reward_game_expected_payoff(reward, unit_cost, n, eq.low, eq.high, p, eq.high);
  };
  constexpr double kTie = 1e-12;
  const double g1 = gap(1.0); // everyone on low
  const double g0 = gap(0.0); // everyone on high
  if (std::abs(g1) <= kTie) {
    eq.p = 1.0;
    eq.residual = std::abs(g1);
    return eq;
  }
  if (std::abs(g0) <= kTie) {
    eq.p = 0.0;
    eq.residual = std::abs(g0);
    return eq;
  }
  if ((g0 < 0.0) != (g1 < 0.0)) {
    auto root = numeric::bisect(gap, 0.0, 1.0);
    eq.p = root.x;
    eq.residual = std::abs(root.fx);
    eq.interior = eq.p > 0.0 && eq.p < 1.0;
    return eq;
  }
  // no indifference point: one action dominates the other against every mixture
  if (g1 > 0.0) {
    eq.p = 1.0;
    eq.residual = std::max(0.0, -g1);
  } else {
    eq.p = 0.0;
    eq.residual = std::max(0.0, g0);
  }
  return eq;
}

/// A payoff-scale function f for pro-rata games, optionally with its derivative.
struct ProRataFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;

  double operator()(double x) const { return f(x); }

  double derivative(double x) const {
    if (df) return df(x);
    return numeric::central_difference(f, x, 1e-6);
  }
};

/// Pro-rata payoff x / (x + y) * f(x + y) (zero for an inactive player).
inline double prorata_payoff(const ProRataFunction& f, double x, double y) {
  if (x == 0.0) return 0.0;
  return x / (x + y) * f(x + y);
}

/// Symmetric equilibrium of a concave pro-rata game: the aggregate q solves
/// (n-1) f(q) + q f'(q) = 0 on (0, q_hi].
inline SymmetricEquilibrium concave_prorata_equilibrium(const ProRataFunction& f, int n,
                                                        double q_hi) {
  if (n < 1) throw DomainError("concave_prorata_equilibrium: n must be >= 1");
  if (!(q_hi > 0.0)) throw DomainError("concave_prorata_equilibrium: q_hi must be > 0");
  const double nn = static_cast<double>(n);
  auto h = [&](double q) { return (nn - 1.0) * f(q) + q * f.derivative(q); };

  // scan for the first sign change from + to -, starting just above 0
  constexpr int kScan = 4096;
  double prev_q = q_hi * 1e-9;
  double prev_h = h(prev_q);
  std::optional<std::pair<double, double>> bracket;
  for (int i = 1; i <= kScan && !bracket; ++i) {
    double q = q_hi * static_cast<double>(i) / kScan;
    double hq = h(q);
    if (prev_h > 0.0 && hq <= 0.0) bracket = std::pair{prev_q, q};
    prev_q = q;
    prev_h = hq;
  }
  if (!bracket) {
    throw NumericFailure("concave_prorata_equilibrium: no interior equilibrium in (0, q_hi]");
  }
  auto root = numeric::bisect(h, bracket->first, bracket->second);
  const double q = root.x;
  return {q / nn, f(q) / nn, n, f(q)};
}

/// Unilateral best response to a fixed aggregate of others, by grid search plus refinement.
inline numeric::Maximum best_response(const AggregativeGame& game, double others,
                                      const numeric::GridSearch& search) {
  return numeric::grid_maximize([&](double x) { return game(x, others); }, search);
}

struct DynamicsResult {
  double action = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct DynamicsOptions {
  numeric::GridSearch search;
  /// Weight on the best response; 0 means 1/n.
  double damping = 0.0;
  double tolerance = 1e-12;
  int max_iterations = 2000;
};

/// Damped symmetric best-response dynamics x <- (1-d) x + d BR((n-1) x).
inline DynamicsResult symmetric_best_response_dynamics(const AggregativeGame& game, int n,
                                                       double start,
                                                       const DynamicsOptions& opts) {
  if (n < 1) throw DomainError("symmetric_best_response_dynamics: n must be >= 1");
  const double d = opts.damping > 0.0 ? opts.damping : 1.0 / n;
  // best responses are only known to the refined grid resolution; steps below d times that
  // resolution are a limit cycle around the fixed point, not progress
  const double resolution = opts.search.step * std::pow(10.0, -opts.search.refine_rounds);
  DynamicsResult res{start, 0, false};
  for (int it = 1; it <= opts.max_iterations; ++it) {
    double br = best_response(game, (n - 1) * res.action, opts.search).x;
    double next = (1.0 - d) * res.action + d * br;
    res.iterations = it;
    bool done = std::abs(next - res.action) <=
                std::max(opts.tolerance * std::max(1.0, std::abs(next)), d * resolution);
    res.action = next;
    if (done) {
      res.converged = true;
      break;
    }
  }
  return res;
}

struct PriceOfAnarchy {
  double poa = 0.0;
  double optimal_welfare = 0.0;
  double optimal_action = 0.0;
  double equilibrium_welfare = 0.0;
  /// Resolution of the symmetric-profile grid the optimum was taken over.
  double grid_step = 0.0;
};

/// W_opt / W_eq with W_opt the supremum of n * phi(a, (n-1) a) over grid points a > 0.
inline PriceOfAnarchy price_of_anarchy(const AggregativeGame& game, int n, double eq_welfare,
                                       double search_upper = numeric::kInf) {
  if (!(eq_welfare > 0.0)) {
    throw DomainError("price_of_anarchy: equilibrium welfare must be > 0");
  }
  if (n < 1) throw DomainError("price_of_anarchy: n must be >= 1");
  PriceOfAnarchy out;
  out.equilibrium_welfare = eq_welfare;
  out.grid_step = game.space.grid_step;
  out.optimal_welfare = -numeric::kInf;
  for (double a : game.space.grid(search_upper)) {
    if (!(a > 0.0)) continue;
    double w = n * game(a, (n - 1) * a);
    if (w > out.optimal_welfare) {
      out.optimal_welfare = w;
      out.optimal_action = a;
    }
  }
  out.poa = out.optimal_welfare / eq_welfare;
  return out;
}

} // namespace sybil
