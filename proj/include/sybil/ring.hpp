#pragma once

// Second-price auctions and permissionless bidding rings.
//
// Ring members report values to a ring center. The highest report w wins, pays T(w) to the
// center, and the center bids in the auction (which then clears at the reserve r). Each losing
// identity receives g(k) (T(w) - r), where k is the number of registered identities; the rest
// of T(w) - r is burned. l(k) = (k-1) g(k) is the share of the surplus passed to losers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sybil/error.hpp"
#include "sybil/numeric.hpp"
#include "sybil/rng.hpp"

namespace sybil::ring {

class ValueDistribution {
public:
  ValueDistribution(std::string name, double v_high, std::function<double(double)> cdf,
                    std::function<double(double)> pdf, std::function<double(double)> quantile)
      : name_(std::move(name)), v_high_(v_high), cdf_(std::move(cdf)), pdf_(std::move(pdf)),
        quantile_(std::move(quantile)) {}

  static ValueDistribution uniform(double v_high = 1.0) {
    if (!(v_high > 0.0)) throw DomainError("uniform: v_h must be > 0");
    return {"uniform", v_high, [v_high](double v) { return std::clamp(v / v_high, 0.0, 1.0); },
            [v_high](double v) { return v < 0.0 || v > v_high ? 0.0 : 1.0 / v_high; },
            [v_high](double u) { return u * v_high; }};
  }

  /// Exponential with the given rate, truncated to [0, v_h].
  static ValueDistribution truncated_exponential(double rate = 2.0, double v_high = 1.0) {
    if (!(rate > 0.0) || !(v_high > 0.0)) throw DomainError("truncated_exponential: bad parameters");
    const double z = -std::expm1(-rate * v_high);
    return {"truncated_exponential", v_high,
            [rate, v_high, z](double v) {
              v = std::clamp(v, 0.0, v_high);
              return -std::expm1(-rate * v) / z;
            },
            [rate, v_high, z](double v) {
              return v < 0.0 || v > v_high ? 0.0 : rate * std::exp(-rate * v) / z;
            },
            [rate, z](double u) { return -std::log1p(-u * z) / rate; }};
  }

  /// Beta(2, 2) on [0, 1].
  static ValueDistribution beta22() {
    auto cdf = [](double v) {
      v = std::clamp(v, 0.0, 1.0);
      return v * v * (3.0 - 2.0 * v);
    };
    return {"beta22", 1.0, cdf,
            [](double v) { return v < 0.0 || v > 1.0 ? 0.0 : 6.0 * v * (1.0 - v); },
            [cdf](double u) {
              if (u <= 0.0) return 0.0;
              if (u >= 1.0) return 1.0;
              return numeric::bisect([&](double v) { return cdf(v) - u; }, 0.0, 1.0,
                                     {200, 1e-15})
                  .x;
            }};
  }

  static ValueDistribution by_name(const std::string& name) {
    if (name == "uniform") return uniform();
    if (name == "texp" || name == "truncated_exponential") return truncated_exponential();
    if (name == "beta22" || name == "beta") return beta22();
    throw ConfigError("unknown value distribution '" + name + "' (uniform | texp | beta22)");
  }

  const std::string& name() const { return name_; }
  double v_high() const { return v_high_; }
  double cdf(double v) const { return cdf_(v); }
  double pdf(double v) const { return pdf_(v); }
  double quantile(double u) const { return quantile_(u); }
  double sample(Rng& rng) const { return quantile_(rng.uniform()); }

private:
  std::string name_;
  double v_high_;
  std::function<double(double)> cdf_;
  std::function<double(double)> pdf_;
  std::function<double(double)> quantile_;
};

/// Which identity count the winner's transfer T is computed for. The ring center only observes
/// registered identities, so the default uses k; `true_members` evaluates T for the true ring
/// size n regardless of how many identities registered.
enum class TransferBasis { reported_identities, true_members };

struct RingConfig {
  /// Fraction of T - r paid to each losing identity when k identities are registered.
  std::function<double(int)> g;
  double reserve = 0.0;
  /// True ring members.
  int n = 2;
  TransferBasis basis = TransferBasis::reported_identities;

  double share(int k) const { return g(k); }
  double loser_pool(int k) const { return k <= 1 ? 0.0 : (k - 1) * g(k); }

  void validate(int k_max = 0) const {
    if (n < 1) throw DomainError("RingConfig: n must be >= 1");
    if (!(reserve >= 0.0)) throw DomainError("RingConfig: reserve must be >= 0");
    for (int k = 2; k <= std::max(k_max, n + 8); ++k) {
      double gk = g(k);
      if (!(gk >= 0.0) || gk > 1.0 / (k - 1) + 1e-15) {
        throw DomainError("RingConfig: g(" + std::to_string(k) + ") outside [0, 1/(k-1)]");
      }
    }
  }
};

namespace families {

enum class Family { constant_share, pie_shrinking };

/// g(k) = theta / (k-1): losers always split a fixed share theta of the surplus.
inline std::function<double(int)> constant_share(double theta) {
  return [theta](int k) { return k <= 1 ? 0.0 : theta / (k - 1); };
}

/// g(k) = theta / ((k-1) 2^{k-2}): the losers' pool theta 2^{2-k} halves with each extra
/// registered identity.
inline std::function<double(int)> pie_shrinking(double theta) {
  return [theta](int k) { return k <= 1 ? 0.0 : std::ldexp(theta / (k - 1), 2 - k); };
}

inline std::function<double(int)> make(Family family, double theta) {
  return family == Family::constant_share ? constant_share(theta) : pie_shrinking(theta);
}

inline Family parse(const std::string& name) {
  if (name == "const" || name == "constant_share") return Family::constant_share;
  if (name == "pie" || name == "pie_shrinking") return Family::pie_shrinking;
  throw ConfigError("unknown ring family '" + name + "' (const | pie)");
}

inline const char* name(Family family) {
  return family == Family::constant_share ? "constant_share" : "pie_shrinking";
}

} // namespace families

// ---------------------------------------------------------------------------------------------
// Plain second-price auction

struct AuctionOutcome {
  std::optional<std::size_t> winner;
  double price = 0.0;
};

/// Highest bid wins (ties broken uniformly at random) and pays max(second-highest bid, reserve).
/// With every bid below the reserve the item stays unsold.
inline AuctionOutcome second_price_outcome(std::span<const double> bids, Rng& rng,
                                           double reserve = 0.0) {
  if (bids.empty()) throw DomainError("second_price_outcome: no bids");
  const double top = *std::max_element(bids.begin(), bids.end());
  AuctionOutcome out;
  if (top < reserve) return out;
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (bids[i] == top) tied.push_back(i);
  }
  out.winner = tied.size() == 1 ? tied[0] : tied[rng.index(tied.size())];
  double second = reserve;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (i != *out.winner) second = std::max(second, bids[i]);
  }
  out.price = second;
  return out;
}

// ---------------------------------------------------------------------------------------------
// Ring transfers

inline constexpr double kQuadratureTolerance = 1e-10;

/// Incentive-compatible transfer with k registered identities and loser pool l = l(k):
///   T(v) F(v)^{k-1+l} = r F(r)^{k-1+l} + \int_r^v (k-1) u F(u)^{k-2+l} f(u) du.
/// The boundary term makes T(r) = r.
inline double transfer_T(double v, const RingConfig& cfg, const ValueDistribution& dist,
                         int identities) {
  const double r = cfg.reserve;
  if (v < r) throw DomainError("transfer_T: v below the reserve");
  if (identities < 1) throw DomainError("transfer_T: need at least one identity");
  const double fv = dist.cdf(v);
  if (!(fv > 0.0)) throw DomainError("transfer_T: F(v) = 0, scale factor is singular");
  const double k = static_cast<double>(identities);
  const double l = cfg.loser_pool(identities);
  const double expo = k - 2.0 + l;
  if (identities == 1) return r; // nobody to compete with
  auto integrand = [&](double u) {
    double fu = dist.cdf(u);
    if (fu <= 0.0) return 0.0;
    return (k - 1.0) * u * std::pow(fu, expo) * dist.pdf(u);
  };
  const double fr = dist.cdf(r);
  const double boundary = fr > 0.0 ? r * std::pow(fr, expo + 1.0) : 0.0;
  // the quotient amplifies absolute quadrature error by 1/F(v)^{k-1+l}
  const double scale = std::pow(fv, expo + 1.0);
  const double tol = kQuadratureTolerance * std::max(scale, 1e-200);
  const double integral = numeric::integrate(integrand, r, v, tol);
  return std::clamp((boundary + integral) / scale, r, v);
}

inline double transfer_T(double v, const RingConfig& cfg, const ValueDistribution& dist) {
  return transfer_T(v, cfg, dist, cfg.n);
}

/// McAfee-McMillan's efficient-ring payment, (n-1) F(v)^{-n} \int_r^v (x-r) F(x)^{n-1} f(x) dx + r.
inline double transfer_T_legacy(double v, int n, double reserve, const ValueDistribution& dist) {
  if (v < reserve) throw DomainError("transfer_T_legacy: v below the reserve");
  const double fv = dist.cdf(v);
  if (!(fv > 0.0)) throw DomainError("transfer_T_legacy: F(v) = 0");
  auto integrand = [&](double x) {
    return (x - reserve) * std::pow(dist.cdf(x), n - 1) * dist.pdf(x);
  };
  const double scale = std::pow(fv, n);
  const double tol = kQuadratureTolerance * std::max(scale, 1e-200);
  return std::clamp((n - 1) * numeric::integrate(integrand, reserve, v, tol) / scale + reserve,
                    reserve, v);
}

namespace detail {

inline int transfer_identities(const RingConfig& cfg, int registered) {
  return cfg.basis == TransferBasis::reported_identities ? registered : cfg.n;
}

/// T(u) - r, zero where F(u) = 0 (the limit, since T(u) <= u there).
inline double surplus_at(double u, const RingConfig& cfg, const ValueDistribution& dist,
                         int identities) {
  if (u <= cfg.reserve || dist.cdf(u) <= 0.0) return 0.0;
  return transfer_T(u, cfg, dist, identities) - cfg.reserve;
}

} // namespace detail

/// Expected payoff of a ring member with value v who reports w and registers m identities (the
/// extra m-1 identities report below the reserve and only collect loser shares):
///   [v - T(w) + (m-1) g(k) (T(w) - r)] F(w)^{n-1}
///     + \int_w^{v_h} m g(k) (n-1) (T(u) - r) F(u)^{n-2} f(u) du,     k = n + m - 1.
inline double ring_payoff_pi(double w, double v, int m, const RingConfig& cfg,
                             const ValueDistribution& dist) {
  if (m < 1) throw DomainError("ring_payoff_pi: m must be >= 1");
  const double vh = dist.v_high();
  if (w < 0.0 || w > vh || v < 0.0 || v > vh) {
    throw DomainError("ring_payoff_pi: w and v must lie in [0, v_h]");
  }
  const int n = cfg.n;
  const int k = n + m - 1;
  const int t_ids = detail::transfer_identities(cfg, k);
  const double gk = cfg.share(k);
  const double r = cfg.reserve;

  double win = 0.0;
  const double fw = dist.cdf(w);
  if (w > r && fw > 0.0) {
    const double t = transfer_T(w, cfg, dist, t_ids);
    win = (v - t + (m - 1) * gk * (t - r)) * std::pow(fw, n - 1);
  }
  double lose = 0.0;
  if (gk > 0.0 && n >= 2) {
    auto integrand = [&](double u) {
      return detail::surplus_at(u, cfg, dist, t_ids) * std::pow(dist.cdf(u), n - 2) * dist.pdf(u);
    };
    lose = m * gk * (n - 1) * numeric::integrate(integrand, std::max(w, r), vh, kQuadratureTolerance);
  }
  return win + lose;
}

enum class VConditioning { unconditional, on_highest };

/// Per-loser transfer of the efficient ring, V(n) = E[(v_(2) - r)^+] / n. With `on_highest`, the
/// expectation is conditional on v_(1) = highest.
inline double efficient_ring_share_V(int n, const ValueDistribution& dist, double reserve,
                                     VConditioning mode = VConditioning::unconditional,
                                     double highest = 0.0) {
  if (n < 2) throw DomainError("efficient_ring_share_V: n must be >= 2");
  const double vh = dist.v_high();
  if (reserve >= vh) return 0.0;
  const double nn = static_cast<double>(n);
  if (mode == VConditioning::unconditional) {
    // density of the second-highest of n draws: n (n-1) F^{n-2} (1-F) f
    auto integrand = [&](double u) {
      double F = dist.cdf(u);
      return (u - reserve) * nn * (nn - 1.0) * std::pow(F, n - 2) * (1.0 - F) * dist.pdf(u);
    };
    return numeric::integrate(integrand, reserve, vh, kQuadratureTolerance) / nn;
  }
  const double fx = dist.cdf(highest);
  if (!(fx > 0.0)) throw DomainError("efficient_ring_share_V: F(v_(1)) = 0");
  if (highest <= reserve) return 0.0;
  auto integrand = [&](double u) {
    return (u - reserve) * (nn - 1.0) * std::pow(dist.cdf(u), n - 2) * dist.pdf(u);
  };
  return numeric::integrate(integrand, reserve, highest, kQuadratureTolerance) /
         std::pow(fx, n - 1) / nn;
}

/// Money flows of one ring auction.
struct RingSettlement {
  std::optional<std::size_t> winner;
  double payment = 0.0;     // T(w), paid by the winner to the center
  double loser_share = 0.0; // paid to every other registered identity
  double to_seller = 0.0;   // reserve
  double burned = 0.0;
};

/// Settles one auction among registered identities' reports (one entry per identity).
inline RingSettlement settle_ring(std::span<const double> reports, const RingConfig& cfg,
                                  const ValueDistribution& dist, Rng& rng) {
  if (reports.empty()) throw DomainError("settle_ring: no reports");
  RingSettlement s;
  const double top = *std::max_element(reports.begin(), reports.end());
  if (top <= cfg.reserve) return s; // ring abstains
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports[i] == top) tied.push_back(i);
  }
  s.winner = tied.size() == 1 ? tied[0] : tied[rng.index(tied.size())];
  const int k = static_cast<int>(reports.size());
  s.payment = transfer_T(top, cfg, dist, detail::transfer_identities(cfg, k));
  s.loser_share = cfg.share(k) * (s.payment - cfg.reserve);
  s.to_seller = cfg.reserve;
  s.burned = s.payment - s.to_seller - (k - 1) * s.loser_share;
  return s;
}

struct RingCandidate {
  double theta = 0.0;
  bool truthful_ok = false;
  bool sybilproof_ok = false;
  double welfare = 0.0;
  double welfare_stderr = 0.0;
  /// Largest |argmax_w pi(w, v, 1) - v| over the truthfulness probes.
  double truth_gap = 0.0;
  /// Largest pi(v, v, m) - pi(v, v, 1) over the Sybil probes.
  double sybil_gain = 0.0;
};

struct RingSearchOptions {
  families::Family family = families::Family::pie_shrinking;
  TransferBasis basis = TransferBasis::reported_identities;
  double reserve = 0.0;
  std::size_t samples = 100'000;
  std::uint64_t seed = 1;
  int truth_points = 5;
  int sybil_points = 20;
  int max_identities = 4;
  /// Reports within this distance of the true value count as truthful (fraction of v_h).
  double truth_tolerance = 1e-3;
  double tolerance = 1e-9;
};

struct RingSearchResult {
  std::vector<RingCandidate> candidates;
  /// E[v_(1) - v_(2)], the profit of the ring with g = 0 (plain second-price competition).
  double baseline = 0.0;
  /// Index into candidates of the best passing theta; falls back to the theta = 0 entry.
  std::optional<std::size_t> best;
  bool fell_back = false;
};

/// Exact E[v_(1) - v_(2)] for n draws.
inline double second_price_surplus(int n, const ValueDistribution& dist) {
  const double nn = static_cast<double>(n);
  auto first = [&](double u) { return u * nn * std::pow(dist.cdf(u), n - 1) * dist.pdf(u); };
  auto second = [&](double u) {
    double F = dist.cdf(u);
    return u * nn * (nn - 1.0) * std::pow(F, n - 2) * (1.0 - F) * dist.pdf(u);
  };
  return numeric::integrate(first, 0.0, dist.v_high(), kQuadratureTolerance) -
         numeric::integrate(second, 0.0, dist.v_high(), kQuadratureTolerance);
}

/// Monte Carlo expected total member utility with n truthful single-identity members.
/// Returns {mean, standard error}.
inline std::pair<double, double> ring_welfare(const RingConfig& cfg, const ValueDistribution& dist,
                                              std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw ConfigError("ring_welfare: need at least 2 samples");
  double sum = 0.0, sumsq = 0.0;
  std::vector<double> values(static_cast<std::size_t>(cfg.n));
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng(derive_seed(seed, s));
    for (auto& v : values) v = dist.sample(rng);
    double w = 0.0;
    auto settle = settle_ring(values, cfg, dist, rng);
    if (settle.winner) {
      w = values[*settle.winner] - settle.payment + (cfg.n - 1) * settle.loser_share;
    }
    sum += w;
    sumsq += w * w;
  }
  const double ns = static_cast<double>(samples);
  const double mean = sum / ns;
  const double var = std::max(0.0, (sumsq - ns * mean * mean) / (ns - 1.0));
  return {mean, std::sqrt(var / ns)};
}

/// Searches a grid of loser-share parameters theta for incentive-compatible rings where one
/// identity per member is an equilibrium, and returns the one with the highest Monte Carlo
/// member welfare.
inline RingSearchResult opt_ring_search(const ValueDistribution& dist, int n,
                                        std::span<const double> thetas,
                                        const RingSearchOptions& opts = {}) {
  if (n < 2) throw DomainError("opt_ring_search: n must be >= 2");
  if (thetas.empty()) throw ConfigError("opt_ring_search: empty theta grid");
  const double vh = dist.v_high();
  RingSearchResult res;
  res.baseline = second_price_surplus(n, dist);

  for (double theta : thetas) {
    if (theta < 0.0 || theta > 1.0) throw ConfigError("opt_ring_search: theta must be in [0, 1]");
    RingConfig cfg{families::make(opts.family, theta), opts.reserve, n, opts.basis};
    cfg.validate(n + opts.max_identities);
    RingCandidate c;
    c.theta = theta;

    c.truthful_ok = true;
    for (int j = 0; j < opts.truth_points; ++j) {
      const double v = dist.quantile((j + 0.5) / opts.truth_points);
      auto best = numeric::grid_maximize(
          [&](double w) { return ring_payoff_pi(w, v, 1, cfg, dist); },
          numeric::GridSearch{0.0, vh, vh / 50.0, 3});
      c.truth_gap = std::max(c.truth_gap, std::abs(best.x - v));
      if (std::abs(best.x - v) > opts.truth_tolerance * vh) c.truthful_ok = false;
    }

    c.sybilproof_ok = true;
    c.sybil_gain = -numeric::kInf;
    for (int j = 0; j < opts.sybil_points; ++j) {
      const double v = dist.quantile((j + 0.5) / opts.sybil_points);
      const double honest = ring_payoff_pi(v, v, 1, cfg, dist);
      for (int m = 2; m <= opts.max_identities; ++m) {
        const double gain = ring_payoff_pi(v, v, m, cfg, dist) - honest;
        c.sybil_gain = std::max(c.sybil_gain, gain);
        if (gain > opts.tolerance) c.sybilproof_ok = false;
      }
    }

    std::tie(c.welfare, c.welfare_stderr) = ring_welfare(cfg, dist, opts.samples, opts.seed);
    res.candidates.push_back(c);
  }

  for (std::size_t i = 0; i < res.candidates.size(); ++i) {
    const auto& c = res.candidates[i];
    if (!c.truthful_ok || !c.sybilproof_ok) continue;
    if (!res.best || c.welfare > res.candidates[*res.best].welfare) res.best = i;
  }
  if (!res.best) {
    res.fell_back = true;
    for (std::size_t i = 0; i < res.candidates.size(); ++i) {
      if (res.candidates[i].theta == 0.0) res.best = i;
    }
  }
  return res;
}

} // namespace sybil::ring
