#pragma once

// Reward-distribution mechanisms: a reward R is split among reported identities according to
// r(n), the total paid out when n identities report.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sybil/equilibrium.hpp"
#include "sybil/error.hpp"
#include "sybil/game.hpp"
#include "sybil/numeric.hpp"
#include "sybil/rng.hpp"

namespace sybil {

struct RewardMechanism {
  std::function<double(int)> r;
  double reward = 0.0;

  double operator()(int n) const { return r(n); }
};

/// r_max(n) = n R / 2^{n-1}: the welfare-optimal Sybil-proof split.
inline double rmax(int n, double reward) {
  if (n < 1) throw DomainError("rmax: n must be >= 1");
  if (!(reward >= 0.0)) throw DomainError("rmax: reward must be >= 0");
  return std::ldexp(static_cast<double>(n) * reward, 1 - n);
}

namespace mechanisms {

inline RewardMechanism optimal(double reward) {
  return {[reward](int n) { return rmax(n, reward); }, reward};
}

inline RewardMechanism constant(double reward) {
  return {[reward](int) { return reward; }, reward};
}

/// r(n) = table[n-1] inside the table, `tail` beyond.
inline RewardMechanism tabulated(std::vector<double> table, double reward, double tail = 0.0) {
  return {[table = std::move(table), tail](int n) {
            return n >= 1 && static_cast<std::size_t>(n) <= table.size() ? table[n - 1] : tail;
          },
          reward};
}

} // namespace mechanisms

/// x r(x+y) / (x+y) - c x for a player reporting x identities against y.
inline double rdm_payoff(const RewardMechanism& mech, int x, int y, double unit_cost) {
  if (x < 0 || y < 0) throw DomainError("rdm_payoff: identity counts must be >= 0");
  if (x == 0) return 0.0;
  const int total = x + y;
  return static_cast<double>(x) * mech(total) / static_cast<double>(total) - unit_cost * x;
}

struct RdmViolation {
  enum class Kind { sybil_gain, out_of_range };
  Kind kind = Kind::sybil_gain;
  int x = 0;
  int y = 0;
  /// r(1+y)/(1+y) for sybil_gain, r(x) for out_of_range.
  double lhs = 0.0;
  /// x r(x+y)/(x+y) for sybil_gain, the cap R for out_of_range.
  double rhs = 0.0;
};

struct RdmVerdict {
  std::optional<RdmViolation> counterexample;
  bool proof() const { return !counterexample.has_value(); }
};

/// Checks r(1+y)/(1+y) >= x r(x+y)/(x+y) for 2 <= x <= x_max, 0 <= y <= y_max, and that
/// 0 <= r(n) <= R on every evaluated n. Returns the first violation (y outer, x inner).
inline RdmVerdict check_rdm_sybilproof(const RewardMechanism& mech, int x_max = 64,
                                       int y_max = 64, double tolerance = 1e-9) {
  if (x_max < 2) throw ConfigError("check_rdm_sybilproof: x_max must be >= 2");
  if (y_max < 0) throw ConfigError("check_rdm_sybilproof: y_max must be >= 0");
  RdmVerdict verdict;
  for (int n = 1; n <= x_max + y_max; ++n) {
    double rn = mech(n);
    if (rn < -tolerance || rn > mech.reward + tolerance) {
      verdict.counterexample =
          RdmViolation{RdmViolation::Kind::out_of_range, n, 0, rn, mech.reward};
      return verdict;
    }
  }
  for (int y = 0; y <= y_max; ++y) {
    const double single = mech(1 + y) / (1.0 + y);
    for (int x = 2; x <= x_max; ++x) {
      const double multi = static_cast<double>(x) * mech(x + y) / static_cast<double>(x + y);
      if (single < multi - tolerance) {
        verdict.counterexample = RdmViolation{RdmViolation::Kind::sybil_gain, x, y, single, multi};
        return verdict;
      }
    }
  }
  return verdict;
}

/// f(x) = (R e / K) x e^{-x/K}: the pro-rata scale under which x = K is a dominant strategy.
inline ProRataFunction dsic_prorata(double reward, double scale) {
  if (!(reward > 0.0) || !(scale > 0.0)) {
    throw DomainError("dsic_prorata: R and K must be > 0");
  }
  const double a = reward * std::exp(1.0) / scale;
  return {[a, scale](double x) { return a * x * std::exp(-x / scale); },
          [a, scale](double x) { return a * std::exp(-x / scale) * (1.0 - x / scale); }};
}

/// Symmetric welfare of the DSIC pro-rata mechanism with n players each locking K.
inline double dsic_welfare(int n, double reward) {
  return reward * n * std::exp(1.0 - n);
}

/// Best response of one player in a pro-rata game by grid search + refinement on [0, x_hi].
inline numeric::Maximum prorata_best_response(const ProRataFunction& f, double others,
                                              const numeric::GridSearch& search) {
  return numeric::grid_maximize([&](double x) { return prorata_payoff(f, x, others); }, search);
}

/// Piecewise-linear tent peaking at (K - eps, R) and crossing zero at K.
struct TentFunction {
  double reward = 1.0;
  double scale = 1.0;
  double epsilon = 0.1;

  void validate() const {
    if (!(reward > 0.0) || !(scale > 0.0)) throw DomainError("tent: R and K must be > 0");
    if (!(epsilon > 0.0) || !(epsilon < scale)) throw DomainError("tent: eps must be in (0, K)");
  }

  double peak() const { return scale - epsilon; }

  double operator()(double x) const {
    if (x <= peak()) return reward * (x / peak());
    return reward * (scale - x) / epsilon;
  }

  double derivative(double x) const { return x < peak() ? reward / peak() : -reward / epsilon; }

  ProRataFunction as_prorata() const {
    TentFunction t = *this;
    return {[t](double x) { return t(x); }, [t](double x) { return t.derivative(x); }};
  }
};

struct TentEquilibrium {
  enum class Method { descending_branch, kink };
  SymmetricEquilibrium eq;
  Method method = Method::descending_branch;
  /// Largest gap between a grid best response and the equilibrium action.
  double best_response_gap = 0.0;
  /// |total action from best-response dynamics - q| on the kink; 0 when the dynamics are skipped.
  double dynamics_gap = 0.0;
};

struct TentOptions {
  /// Grid step for best-response checks, as a fraction of K.
  double grid_fraction = 1e-3;
  /// Refinement rounds inside best-response dynamics.
  int refine_rounds = 5;
  /// Cross-check a kink equilibrium with best-response dynamics.
  bool run_dynamics = true;
};

/// Symmetric equilibrium of the pro-rata game with a tent function. The first-order condition
/// (n-1) f(q) + q f'(q) = 0 has the root q = (n-1) K / n on the descending branch when
/// n eps > K. Otherwise the left derivative of the payoff at the peak is positive and the right
/// one is not, so the equilibrium is the kink q = K - eps.
inline TentEquilibrium tent_equilibrium(const TentFunction& tent, int n, TentOptions opts = {}) {
  tent.validate();
  if (n < 1) throw DomainError("tent_equilibrium: n must be >= 1");
  const double nn = static_cast<double>(n);
  const ProRataFunction f = tent.as_prorata();
  const double K = tent.scale;

  TentEquilibrium out;
  double q;
  if (nn * tent.epsilon > K) {
    q = (nn - 1.0) * K / nn;
    out.method = TentEquilibrium::Method::descending_branch;
  } else {
    q = tent.peak();
    out.method = TentEquilibrium::Method::kink;
    if (opts.run_dynamics && n > 1) {
      AggregativeGame game =
          games::pro_rata(f.f, ActionSpace::continuous(0.0, K, opts.grid_fraction * K), "tent");
      DynamicsOptions dyn;
      dyn.search = {0.0, K, opts.grid_fraction * K, opts.refine_rounds};
      auto res = symmetric_best_response_dynamics(game, n, tent.peak() / nn, dyn);
      if (!res.converged) {
        throw NumericFailure("tent_equilibrium: best-response dynamics did not converge");
      }
      out.dynamics_gap = std::abs(nn * res.action - q);
    }
  }
  out.eq = {q / nn, f(q) / nn, n, f(q)};

  // a unilateral grid best response should reproduce the equilibrium action
  const numeric::GridSearch check{0.0, K, opts.grid_fraction * K, opts.refine_rounds};
  const double br = prorata_best_response(f, (nn - 1.0) * out.eq.per_player_action, check).x;
  out.best_response_gap = std::abs(br - out.eq.per_player_action);
  return out;
}

/// Non-divisible item: each of n reporters receives it with probability 1/2^{n-1}; otherwise
/// nobody does. Returns the recipient index, if any.
inline std::optional<std::size_t> nondivisible_lottery(std::size_t n, Rng& rng) {
  if (n == 0) throw DomainError("nondivisible_lottery: n must be >= 1");
  const double p_alloc = rmax(static_cast<int>(n), 1.0);
  auto perm = rng.permutation(n);
  if (!rng.bernoulli(p_alloc)) return std::nullopt;
  return perm[0];
}

} // namespace sybil
