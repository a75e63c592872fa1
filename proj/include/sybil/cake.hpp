#pragma once

// Sybil-proof truthful cake cutting on [0, 1] with piecewise-constant valuations.
//
// The mechanism builds an exact partition of the declared measures, hands the pieces out by a
// uniformly random permutation, and then burns the whole allocation unless a coin with
// Pr[keep] = n / 2^{n-1} comes up. Every reporter's expected value is 1 / 2^{n-1} whatever it
// declares, and k identities against y others collect k / 2^{y+k-1} in expectation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "sybil/error.hpp"
#include "sybil/numeric.hpp"
#include "sybil/rng.hpp"

namespace sybil::cake {

/// Breakpoints closer than this are treated as one.
inline constexpr double kMergeTolerance = 1e-15;

class PiecewiseMeasure {
public:
  PiecewiseMeasure() : PiecewiseMeasure({0.0, 1.0}, {1.0}) {}

  /// breakpoints 0 = b0 < ... < bm = 1, one nonnegative density per segment, total mass 1.
  PiecewiseMeasure(std::vector<double> breakpoints, std::vector<double> densities) {
    if (breakpoints.size() < 2 || densities.size() + 1 != breakpoints.size()) {
      throw DomainError("PiecewiseMeasure: need m+1 breakpoints for m densities");
    }
    if (std::abs(breakpoints.front()) > kMergeTolerance ||
        std::abs(breakpoints.back() - 1.0) > kMergeTolerance) {
      throw DomainError("PiecewiseMeasure: breakpoints must start at 0 and end at 1");
    }
    breakpoints.front() = 0.0;
    breakpoints.back() = 1.0;
    breaks_.push_back(0.0);
    for (std::size_t i = 0; i < densities.size(); ++i) {
      if (!(densities[i] >= 0.0) || !std::isfinite(densities[i])) {
        throw DomainError("PiecewiseMeasure: densities must be finite and >= 0");
      }
      double b = breakpoints[i + 1];
      if (b < breaks_.back() - kMergeTolerance) {
        throw DomainError("PiecewiseMeasure: breakpoints must be increasing");
      }
      if (b - breaks_.back() <= kMergeTolerance) continue; // zero-length segment
      breaks_.push_back(b);
      density_.push_back(densities[i]);
    }
    if (density_.empty()) throw DomainError("PiecewiseMeasure: empty support");
    breaks_.back() = 1.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < density_.size(); ++i) mass += density_[i] * (breaks_[i + 1] - breaks_[i]);
    if (std::abs(mass - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "PiecewiseMeasure: total mass " << mass << " differs from 1";
      throw DomainError(msg.str());
    }
  }

  static PiecewiseMeasure uniform() { return {}; }

  /// Parses "b0 d0 b1 d1 ... bm".
  static PiecewiseMeasure parse(const std::string& line) {
    std::istringstream in(line);
    std::vector<double> tokens;
    double v;
    while (in >> v) tokens.push_back(v);
    if (!in.eof()) throw DomainError("PiecewiseMeasure: non-numeric token in '" + line + "'");
    if (tokens.size() < 3 || tokens.size() % 2 == 0) {
      throw DomainError("PiecewiseMeasure: expected b0 d0 b1 ... bm, got '" + line + "'");
    }
    std::vector<double> b, d;
    for (std::size_t i = 0; i < tokens.size(); ++i) (i % 2 == 0 ? b : d).push_back(tokens[i]);
    return {std::move(b), std::move(d)};
  }

  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& densities() const { return density_; }

  double density_at(double x) const {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t seg = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
    return density_[std::min(seg, density_.size() - 1)];
  }

  /// Measure of [a, b] ⊆ [0, 1].
  double interval(double a, double b) const {
    a = std::clamp(a, 0.0, 1.0);
    b = std::clamp(b, 0.0, 1.0);
    if (b <= a) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < density_.size(); ++i) {
      double lo = std::max(a, breaks_[i]);
      double hi = std::min(b, breaks_[i + 1]);
      if (hi > lo) total += density_[i] * (hi - lo);
    }
    return total;
  }

private:
  std::vector<double> breaks_;
  std::vector<double> density_;
};

struct Interval {
  double lo;
  double hi;
};

/// Union of disjoint intervals in canonical (sorted, merged) form.
class Slice {
public:
  Slice() = default;

  explicit Slice(std::vector<Interval> intervals) {
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (const auto& iv : intervals) {
      if (!(iv.lo <= iv.hi) || iv.lo < 0.0 || iv.hi > 1.0) {
        throw DomainError("Slice: interval outside [0, 1] or reversed");
      }
      if (iv.hi - iv.lo <= kMergeTolerance) continue;
      if (!parts_.empty()) {
        Interval& last = parts_.back();
        if (iv.lo < last.hi - kMergeTolerance) throw DomainError("Slice: overlapping intervals");
        if (iv.lo <= last.hi + kMergeTolerance) {
          last.hi = std::max(last.hi, iv.hi);
          continue;
        }
      }
      parts_.push_back(iv);
    }
  }

  const std::vector<Interval>& intervals() const { return parts_; }
  bool empty() const { return parts_.empty(); }

  double length() const {
    double l = 0.0;
    for (const auto& iv : parts_) l += iv.hi - iv.lo;
    return l;
  }

private:
  std::vector<Interval> parts_;
};

inline double measure_value(const PiecewiseMeasure& mu, const Slice& s) {
  double total = 0.0;
  for (const auto& iv : s.intervals()) total += mu.interval(iv.lo, iv.hi);
  return total;
}

/// Refines [0, 1] by every declared breakpoint and splits each refined segment into n equal
/// parts; slice j collects part j of every segment. Every declared density is constant on a
/// refined segment, so each declared measure gives every slice exactly 1/n.
inline std::vector<Slice> exact_partition(std::span<const PiecewiseMeasure> declared) {
  const std::size_t n = declared.size();
  if (n == 0) throw DomainError("exact_partition: need at least one declared measure");
  std::vector<double> cuts;
  for (const auto& mu : declared) cuts.insert(cuts.end(), mu.breakpoints().begin(), mu.breakpoints().end());
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> refined;
  for (double c : cuts) {
    if (refined.empty() || c - refined.back() > kMergeTolerance) refined.push_back(c);
  }
  refined.back() = 1.0;

  std::vector<std::vector<Interval>> pieces(n);
  const double nn = static_cast<double>(n);
  for (std::size_t s = 0; s + 1 < refined.size(); ++s) {
    const double a = refined[s];
    const double b = refined[s + 1];
    for (std::size_t j = 0; j < n; ++j) {
      double lo = a + (b - a) * static_cast<double>(j) / nn;
      double hi = j + 1 == n ? b : a + (b - a) * static_cast<double>(j + 1) / nn;
      pieces[j].push_back({lo, hi});
    }
  }
  std::vector<Slice> out;
  out.reserve(n);
  for (auto& p : pieces) out.emplace_back(std::move(p));
  return out;
}

/// Pr[the allocation is kept] = n / 2^{n-1}.
inline double keep_probability(std::size_t n) {
  return std::ldexp(static_cast<double>(n), 1 - static_cast<int>(n));
}

struct Allocation {
  std::vector<Slice> slices;
  bool kept = false;
};

/// One draw of the mechanism's randomness: the permutation and the coin.
struct MechanismDraw {
  std::vector<std::size_t> permutation;
  bool kept = false;
};

/// RNG contract: Fisher-Yates permutation on the seeded stream, then one uniform draw for the
/// coin.
inline MechanismDraw draw_mechanism(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  MechanismDraw d;
  d.permutation = rng.permutation(n);
  d.kept = rng.bernoulli(keep_probability(n));
  return d;
}

inline Allocation allocate(const std::vector<Slice>& partition, const MechanismDraw& draw) {
  Allocation a;
  a.kept = draw.kept;
  a.slices.resize(partition.size());
  if (draw.kept) {
    for (std::size_t i = 0; i < partition.size(); ++i) a.slices[i] = partition[draw.permutation[i]];
  }
  return a;
}

inline Allocation run_mechanism(std::span<const PiecewiseMeasure> declared, std::uint64_t seed) {
  if (declared.empty()) throw DomainError("run_mechanism: need n >= 1 declared measures");
  return allocate(exact_partition(declared), draw_mechanism(declared.size(), seed));
}

/// 1 / 2^{n-1}.
inline double expected_truthful_value(int n) {
  if (n < 1) throw DomainError("expected_truthful_value: n must be >= 1");
  return std::ldexp(1.0, 1 - n);
}

/// Expected total value of k identities against y honest reporters: k / 2^{y+k-1}.
inline double sybil_deviation_value(int k, int y) {
  if (k < 1 || y < 0) throw DomainError("sybil_deviation_value: need k >= 1, y >= 0");
  return std::ldexp(static_cast<double>(k), 1 - y - k);
}

/// A batch of mechanism runs sharing the declared measures: per-run permutation and coin.
struct Transcript {
  std::vector<PiecewiseMeasure> declared;
  std::vector<Slice> partition;
  std::vector<MechanismDraw> runs;

  Allocation allocation(std::size_t run) const { return allocate(partition, runs[run]); }
};

/// Runs the mechanism `runs` times with seeds derive_seed(seed, r).
inline Transcript simulate(std::vector<PiecewiseMeasure> declared, std::size_t runs,
                           std::uint64_t seed) {
  if (declared.empty()) throw DomainError("simulate: need n >= 1 declared measures");
  Transcript t;
  t.partition = exact_partition(declared);
  t.declared = std::move(declared);
  t.runs.reserve(runs);
  for (std::size_t r = 0; r < runs; ++r) t.runs.push_back(draw_mechanism(t.declared.size(), derive_seed(seed, r)));
  return t;
}

struct FairnessReport {
  bool envy_free_in_expectation = false;
  /// Largest alpha with E[mu_i(A_i)] >= alpha - CI for every i.
  double alpha_proportional = 0.0;
  /// min_i of the point estimates E[mu_i(A_i)].
  double alpha_point = 0.0;
  bool non_wasteful = false;
  /// own[i] = E[mu_i(A_i)], cross[i][j] = E[mu_i(A_j)].
  std::vector<double> own;
  std::vector<double> own_stderr;
  std::vector<std::vector<double>> cross;
};

inline constexpr std::size_t kMinFairnessRuns = 10'000;

/// Monte Carlo fairness estimates under the true measures. Confidence half-width: z standard
/// errors.
inline FairnessReport check_fairness(const Transcript& t, std::span<const PiecewiseMeasure> truth,
                                     double z = 3.0) {
  const std::size_t n = t.partition.size();
  if (truth.size() != n) throw DomainError("check_fairness: one true measure per identity");
  if (t.runs.size() < kMinFairnessRuns) {
    throw StatisticalPowerError("check_fairness: need at least 10^4 runs, got " +
                                std::to_string(t.runs.size()));
  }
  // value[i][k] = mu_i(C_k)
  std::vector<std::vector<double>> value(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) value[i][k] = measure_value(truth[i], t.partition[k]);
  }
  std::vector<std::vector<double>> sum(n, std::vector<double>(n, 0.0));
  std::vector<double> sumsq(n, 0.0);
  bool always_kept = true;
  for (const auto& run : t.runs) {
    if (!run.kept) {
      always_kept = false;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) sum[i][j] += value[i][run.permutation[j]];
      double own = value[i][run.permutation[i]];
      sumsq[i] += own * own;
    }
  }
  const double runs = static_cast<double>(t.runs.size());
  FairnessReport rep;
  rep.cross.assign(n, std::vector<double>(n));
  rep.own.resize(n);
  rep.own_stderr.resize(n);
  rep.envy_free_in_expectation = true;
  rep.alpha_proportional = numeric::kInf;
  rep.alpha_point = numeric::kInf;
  std::vector<double> cross_se(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) rep.cross[i][j] = sum[i][j] / runs;
    rep.own[i] = rep.cross[i][i];
    double var = std::max(0.0, sumsq[i] / runs - rep.own[i] * rep.own[i]);
    rep.own_stderr[i] = std::sqrt(var / runs);
    rep.alpha_proportional = std::min(rep.alpha_proportional, rep.own[i] + z * rep.own_stderr[i]);
    rep.alpha_point = std::min(rep.alpha_point, rep.own[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      // the cross term's standard error is approximated by the diagonal one
      if (rep.own[i] < rep.cross[i][j] - 2.0 * z * rep.own_stderr[i]) rep.envy_free_in_expectation = false;
    }
  }
  rep.non_wasteful = always_kept;
  return rep;
}

} // namespace sybil::cake
