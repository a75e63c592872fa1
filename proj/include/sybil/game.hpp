#pragma once

// Symmetric aggregative games, their Sybil extension, and a brute-force Sybil-proofness
// verifier.
//
// A game is described by a payoff oracle phi(own action, aggregate of all other identities).
// In the Sybil extension a player controls a tuple of identities; each identity earns phi and
// the player pays cost(#identities, #foreign identities) once.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sybil/error.hpp"
#include "sybil/numeric.hpp"

namespace sybil {

enum class ActionKind { continuous, integer };

struct ActionSpace {
  ActionKind kind = ActionKind::continuous;
  double lower = 0.0;
  double upper = numeric::kInf;
  double grid_step = 1e-2;

  static ActionSpace continuous(double lower, double upper, double grid_step) {
    ActionSpace s{ActionKind::continuous, lower, upper, grid_step};
    s.validate();
    return s;
  }

  static ActionSpace integer(double lower, double upper, double grid_step = 1.0) {
    ActionSpace s{ActionKind::integer, lower, upper, grid_step};
    s.validate();
    return s;
  }

  bool bounded() const { return std::isfinite(upper); }

  void validate() const {
    if (!(lower >= 0.0)) throw DomainError("action space: lower bound must be >= 0");
    if (bounded() && !(upper > lower)) throw DomainError("action space: upper must exceed lower");
    if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
      throw DomainError("action space: grid_step must be positive and finite");
    }
    if (kind == ActionKind::integer &&
        (grid_step != std::floor(grid_step) || lower != std::floor(lower))) {
      throw DomainError("action space: integer spaces need integral lower bound and step");
    }
  }

  bool admissible(double a) const {
    if (!std::isfinite(a) || a < lower || a > upper) return false;
    return kind == ActionKind::continuous || a == std::floor(a);
  }

  /// Grid points in [lower, min(upper, search_upper)].
  std::vector<double> grid(double search_upper = numeric::kInf) const {
    double hi = std::min(upper, search_upper);
    if (!std::isfinite(hi)) {
      throw ConfigError("action space is unbounded and no search upper bound was given");
    }
    std::size_t count = numeric::grid_points(lower, hi, grid_step);
    std::vector<double> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      pts.push_back(std::min(hi, lower + static_cast<double>(i) * grid_step));
    }
    return pts;
  }
};

/// How identities' actions combine into the aggregate seen by others, and how a player's
/// identities are merged into one for the merged-identity comparison.
enum class Aggregation { sum, max };

struct AggregativeGame {
  std::string name;
  std::function<double(double, double)> phi;
  ActionSpace space;
  Aggregation aggregation = Aggregation::sum;
  /// True when the action space is a commutative monoid under the aggregation, so a tuple of
  /// identities can be merged into one identity playing the aggregate.
  bool mergeable = true;

  double combine(double a, double b) const {
    return aggregation == Aggregation::sum ? a + b : std::max(a, b);
  }

  double aggregate(std::span<const double> actions) const {
    double acc = 0.0;
    for (double a : actions) acc = combine(acc, a);
    return acc;
  }

  double operator()(double own, double others) const { return phi(own, others); }
};

struct SybilCost {
  std::function<double(int, int)> cost;
  std::optional<double> linear_c;

  double operator()(int own_identities, int foreign_identities) const {
    return cost(own_identities, foreign_identities);
  }

  static SybilCost zero() { return linear(0.0); }

  static SybilCost linear(double c) {
    if (!(c >= 0.0)) throw DomainError("linear Sybil cost must be >= 0");
    return {[c](int x, int) { return c * x; }, c};
  }

  /// C(1, y) = 0 and C(x, y) = +inf for x >= 2: the Sybil game collapses to the base game.
  static SybilCost single_identity_only() {
    return {[](int x, int) { return x <= 1 ? 0.0 : numeric::kInf; }, std::nullopt};
  }
};

struct SybilStrategy {
  std::vector<double> actions;

  std::size_t identities() const { return actions.size(); }
};

struct BudgetedGame {
  AggregativeGame base;
  double budget = numeric::kInf;

  bool admits(const SybilStrategy& s) const {
    return std::accumulate(s.actions.begin(), s.actions.end(), 0.0) <= budget;
  }
};

namespace detail {

inline void require_admissible(const AggregativeGame& game, std::span<const double> actions,
                               const char* label, bool strictly_positive) {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    double a = actions[i];
    if (!game.space.admissible(a) || (strictly_positive && !(a > 0.0))) {
      std::ostringstream msg;
      msg << label << "[" << i << "] = " << a << " is not admissible in game '" << game.name
          << "'";
      if (strictly_positive) msg << " (every identity must take a positive action)";
      throw DomainError(msg.str());
    }
  }
}

} // namespace detail

/// Total payoff of a player running the identities `mine` against `foreign` identities:
/// sum_j phi(a_j, aggregate of everyone else) - cost(|mine|, |foreign|).
inline double sybil_payoff(const AggregativeGame& game, const SybilCost& cost,
                           const SybilStrategy& mine, std::span<const double> foreign) {
  if (mine.actions.empty()) throw DomainError("sybil_payoff: strategy has no identities");
  detail::require_admissible(game, mine.actions, "mine", true);
  detail::require_admissible(game, foreign, "foreign", false);

  const double foreign_agg = game.aggregate(foreign);
  double total = 0.0;
  if (game.aggregation == Aggregation::sum) {
    const double mine_sum = game.aggregate(mine.actions);
    for (double a : mine.actions) total += game(a, foreign_agg + (mine_sum - a));
  } else {
    for (std::size_t j = 0; j < mine.actions.size(); ++j) {
      double others = foreign_agg;
      for (std::size_t k = 0; k < mine.actions.size(); ++k) {
        if (k != j) others = game.combine(others, mine.actions[k]);
      }
      total += game(mine.actions[j], others);
    }
  }
  return total - cost(static_cast<int>(mine.actions.size()), static_cast<int>(foreign.size()));
}

inline double sybil_payoff(const AggregativeGame& game, const SybilCost& cost,
                           std::initializer_list<double> mine,
                           std::initializer_list<double> foreign) {
  std::vector<double> f(foreign);
  return sybil_payoff(game, cost, SybilStrategy{std::vector<double>(mine)}, f);
}

/// Payoff of the single identity that plays the merged action of `mine`.
inline double merged_payoff(const AggregativeGame& game, const SybilCost& cost,
                            const SybilStrategy& mine, std::span<const double> foreign) {
  if (!game.mergeable) {
    throw UnsupportedOperation("merged_payoff: game '" + game.name +
                               "' has no monoid structure for merging identities");
  }
  if (mine.actions.empty()) throw DomainError("merged_payoff: strategy has no identities");
  detail::require_admissible(game, mine.actions, "mine", true);
  detail::require_admissible(game, foreign, "foreign", false);
  return game(game.aggregate(mine.actions), game.aggregate(foreign)) -
         cost(1, static_cast<int>(foreign.size()));
}

struct VerifierOptions {
  /// Upper end of the searched action range when the action space is unbounded.
  double search_upper = numeric::kInf;
  double tolerance = 1e-9;
  /// Local refinement rounds (step / 10 each) for continuous spaces.
  int refine_rounds = 3;
  std::optional<double> budget;
  /// Hard cap on enumerated tuples per (identity count, foreign profile).
  std::size_t max_tuples = 20'000'000;
};

/// Best payoff reachable with a single identity (the single-identity comparator). Ranges over the whole
/// grid, including the base point.
inline numeric::Maximum best_single_payoff(const AggregativeGame& game, const SybilCost& cost,
                                           std::span<const double> foreign,
                                           const VerifierOptions& opts = {}) {
  double hi = std::min(game.space.upper, opts.search_upper);
  if (opts.budget) hi = std::min(hi, *opts.budget);
  if (!std::isfinite(hi)) {
    throw ConfigError("best_single_payoff: unbounded action space needs a search upper bound");
  }
  const double foreign_agg = game.aggregate(foreign);
  const double c1 = cost(1, static_cast<int>(foreign.size()));
  auto value = [&](double x) { return game(x, foreign_agg) - c1; };
  numeric::GridSearch search{game.space.lower, hi, game.space.grid_step,
                             game.space.kind == ActionKind::continuous ? opts.refine_rounds : 0};
  if (game.space.kind == ActionKind::integer) {
    // integer grids: plain scan, refinement would leave the lattice
    numeric::Maximum best{game.space.lower, -numeric::kInf};
    for (double x : game.space.grid(hi)) {
      double v = value(x);
      if (v > best.value) best = {x, v};
    }
    return best;
  }
  return numeric::grid_maximize(value, search);
}

struct SybilCounterexample {
  std::vector<double> mine;
  std::vector<double> foreign;
  double sybil_value = 0.0;
  double single_value = 0.0;
  double gain = 0.0;
};

struct SybilVerdict {
  std::optional<SybilCounterexample> counterexample;
  /// Grid resolution at which "proof" holds.
  double resolution = 0.0;
  std::size_t strategies_checked = 0;

  bool proof() const { return !counterexample.has_value(); }
};

namespace detail {

/// Value the player could guarantee with one identity against `foreign`.
inline double single_identity_value(const AggregativeGame& game, const SybilCost& cost,
                                    const SybilStrategy& mine, std::span<const double> foreign,
                                    const VerifierOptions& opts) {
  if (game.mergeable) return merged_payoff(game, cost, mine, foreign);
  return best_single_payoff(game, cost, foreign, opts).value;
}

inline double gain_of(const AggregativeGame& game, const SybilCost& cost, const SybilStrategy& s,
                      std::span<const double> foreign, const VerifierOptions& opts,
                      double* sybil_value = nullptr, double* single_value = nullptr) {
  double sv = sybil_payoff(game, cost, s, foreign);
  double mv = single_identity_value(game, cost, s, foreign, opts);
  if (sybil_value) *sybil_value = sv;
  if (single_value) *single_value = mv;
  if (sv == mv) return 0.0; // also covers -inf == -inf
  return sv - mv;
}

inline double binomial_count(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

} // namespace detail

/// Exhaustive search over grid-valued Sybil strategies with 2..max_identities identities against
/// each foreign profile. Returns the first (lexicographically smallest) strictly profitable
/// deviation, or "proof at the searched resolution".
inline SybilVerdict verify_sybilproof(const AggregativeGame& game, const SybilCost& cost,
                                      int max_identities,
                                      const std::vector<std::vector<double>>& foreign_profiles,
                                      const VerifierOptions& opts = {}) {
  if (max_identities < 2) throw ConfigError("verify_sybilproof: max_identities must be >= 2");
  double hi = std::min(game.space.upper, opts.search_upper);
  if (!std::isfinite(hi)) {
    throw ConfigError("verify_sybilproof: unbounded action space for game '" + game.name +
                      "' needs a search upper bound");
  }
  std::vector<double> points;
  for (double x : game.space.grid(hi)) {
    if (x > 0.0) points.push_back(x);
  }
  if (points.empty()) throw ConfigError("verify_sybilproof: grid has no positive action");

  SybilVerdict verdict;
  verdict.resolution = game.space.grid_step;
  const bool refine = game.space.kind == ActionKind::continuous && opts.refine_rounds > 0;
  if (refine) verdict.resolution = game.space.grid_step * std::pow(10.0, -opts.refine_rounds);

  for (const auto& foreign : foreign_profiles) {
    for (int k = 2; k <= max_identities; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      if (detail::binomial_count(points.size() + kk - 1, kk) > static_cast<double>(opts.max_tuples)) {
        throw ConfigError("verify_sybilproof: search space too large; coarsen the grid");
      }
      // non-decreasing index tuples enumerate multisets in lexicographic order
      std::vector<std::size_t> idx(kk, 0);
      SybilStrategy s{std::vector<double>(kk)};
      SybilStrategy best_s;
      double best_gain = -numeric::kInf;
      while (true) {
        for (std::size_t i = 0; i < kk; ++i) s.actions[i] = points[idx[i]];
        if (!opts.budget || std::accumulate(s.actions.begin(), s.actions.end(), 0.0) <= *opts.budget) {
          ++verdict.strategies_checked;
          double sv = 0.0, mv = 0.0;
          double g = detail::gain_of(game, cost, s, foreign, opts, &sv, &mv);
          if (g > opts.tolerance) {
            verdict.counterexample = SybilCounterexample{s.actions, foreign, sv, mv, g};
            return verdict;
          }
          if (g > best_gain) {
            best_gain = g;
            best_s = s;
          }
        }
        // advance
        std::size_t pos = kk;
        while (pos > 0 && idx[pos - 1] == points.size() - 1) --pos;
        if (pos == 0) break;
        ++idx[pos - 1];
        for (std::size_t i = pos; i < kk; ++i) idx[i] = idx[pos - 1];
      }

      if (!refine || best_s.actions.empty()) continue;
      // coordinate-wise refinement around the best grid tuple
      double step = game.space.grid_step;
      SybilStrategy cur = best_s;
      double cur_gain = best_gain;
      for (int round = 0; round < opts.refine_rounds; ++round) {
        step /= 10.0;
        for (std::size_t i = 0; i < kk; ++i) {
          const double centre = cur.actions[i];
          for (int j = -10; j <= 10; ++j) {
            double a = centre + j * step;
            if (!(a > 0.0) || a > hi) continue;
            SybilStrategy trial = cur;
            trial.actions[i] = a;
            if (opts.budget &&
                std::accumulate(trial.actions.begin(), trial.actions.end(), 0.0) > *opts.budget) {
              continue;
            }
            ++verdict.strategies_checked;
            double sv = 0.0, mv = 0.0;
            double g = detail::gain_of(game, cost, trial, foreign, opts, &sv, &mv);
            if (g > opts.tolerance) {
              verdict.counterexample = SybilCounterexample{trial.actions, foreign, sv, mv, g};
              return verdict;
            }
            if (g > cur_gain) {
              cur_gain = g;
              cur = std::move(trial);
            }
          }
        }
      }
    }
  }
  return verdict;
}

inline SybilVerdict verify_sybilproof(const BudgetedGame& game, const SybilCost& cost,
                                      int max_identities,
                                      const std::vector<std::vector<double>>& foreign_profiles,
                                      VerifierOptions opts = {}) {
  opts.budget = opts.budget ? std::min(*opts.budget, game.budget) : game.budget;
  return verify_sybilproof(game.base, cost, max_identities, foreign_profiles, opts);
}

// ---------------------------------------------------------------------------------------------
// Game catalogue

namespace games {

/// Participation game: every identity plays 1 and shares R pro rata by head count.
inline AggregativeGame participation(double reward) {
  return {"participation",
          [reward](double x, double y) { return x == 0.0 ? 0.0 : reward * x / (x + y); },
          ActionSpace::integer(0.0, 1.0), Aggregation::sum, /*mergeable=*/false};
}

/// phi(x, y) = R x / (x + y) - c x over nonnegative reals.
inline AggregativeGame reward_share(double reward, double unit_cost, double search_upper,
                                    double grid_step) {
  return {"reward_share",
          [reward, unit_cost](double x, double y) {
            if (x == 0.0) return 0.0;
            return reward * x / (x + y) - unit_cost * x;
          },
          ActionSpace::continuous(0.0, search_upper, grid_step), Aggregation::sum, true};
}

/// phi(x, y) = x / (x + y) * f(x + y).
inline AggregativeGame pro_rata(std::function<double(double)> f, ActionSpace space,
                                std::string name = "pro_rata") {
  return {std::move(name),
          [f = std::move(f)](double x, double y) { return x == 0.0 ? 0.0 : x / (x + y) * f(x + y); },
          space, Aggregation::sum, true};
}

/// Linear-demand Cournot: phi(x, y) = x (beta - x - y).
inline AggregativeGame cournot(double beta, double grid_step = 1e-2) {
  return {"cournot", [beta](double x, double y) { return x * (beta - x - y); },
          ActionSpace::continuous(0.0, beta, grid_step), Aggregation::sum, true};
}

/// phi(x, y) = 2 x e^{-(x + y)}.
inline AggregativeGame exponential(double search_upper = 5.0, double grid_step = 1e-2) {
  return {"exponential", [](double x, double y) { return 2.0 * x * std::exp(-(x + y)); },
          ActionSpace::continuous(0.0, search_upper, grid_step), Aggregation::sum, true};
}

/// phi(x, y) = g(x) f(x + y).
inline AggregativeGame product_form(std::function<double(double)> g, std::function<double(double)> f,
                                    ActionSpace space) {
  return {"product_form",
          [g = std::move(g), f = std::move(f)](double x, double y) {
            return x == 0.0 ? 0.0 : g(x) * f(x + y);
          },
          space, Aggregation::sum, true};
}

/// Second-price sealed bid from a bidder valuing the item at `value`. The aggregate is the
/// highest competing bid; a tie splits the surplus evenly. A zero bid is inactive.
inline AggregativeGame second_price(double value, double max_bid, double grid_step) {
  return {"second_price",
          [value](double bid, double best_other) {
            if (bid == 0.0) return 0.0;
            if (bid > best_other) return value - best_other;
            if (bid == best_other) return 0.5 * (value - best_other);
            return 0.0;
          },
          ActionSpace::continuous(0.0, max_bid, grid_step), Aggregation::max, true};
}

} // namespace games

} // namespace sybil
