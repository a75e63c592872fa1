#pragma once

// Experiment drivers behind the sybil_lab CLI. Each writes one CSV table (config comment line,
// header, rows) to an ostream.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sybil/cake.hpp"
#include "sybil/commitment.hpp"
#include "sybil/csv.hpp"
#include "sybil/equilibrium.hpp"
#include "sybil/error.hpp"
#include "sybil/game.hpp"
#include "sybil/rdm.hpp"
#include "sybil/ring.hpp"

namespace sybil::experiments {

inline constexpr const char* kVersion = "0.1.0";

using Params = std::vector<std::pair<std::string, std::string>>;

inline void write_config(csv::Writer& w, const std::string& subcommand, std::uint64_t seed,
                         const Params& params) {
  std::ostringstream line;
  line << "sybil_lab " << kVersion << ' ' << subcommand << " seed=" << seed;
  for (const auto& [k, v] : params) line << ' ' << k << '=' << v;
  w.comment(line.str());
}

// ---------------------------------------------------------------------------------------------

struct RdmConfig {
  double reward = 10.0;
  int n_max = 12;
  double scale = 1.0;
  /// Tent epsilon as a fraction of K.
  double eps_fraction = 0.01;
};

namespace detail {

inline void rdm_rows(const RdmConfig& cfg, csv::Writer& w) {
  if (cfg.n_max < 1) throw ConfigError("rdm: n-max must be >= 1");
  TentFunction tent{cfg.reward, cfg.scale, cfg.eps_fraction * cfg.scale};
  tent.validate();
  if (!check_rdm_sybilproof(mechanisms::optimal(cfg.reward), cfg.n_max, cfg.n_max).proof()) {
    throw InvariantViolation("rdm: r_max failed its Sybil-proofness check");
  }
  for (int n = 1; n <= cfg.n_max; ++n) {
    w.row(n, rmax(n, cfg.reward), dsic_welfare(n, cfg.reward), tent_equilibrium(tent, n).eq.welfare);
  }
}

inline Params rdm_params(const RdmConfig& cfg) {
  return {{"R", csv::format(cfg.reward)},
          {"n_max", csv::format(cfg.n_max)},
          {"K", csv::format(cfg.scale)},
          {"eps_fraction", csv::format(cfg.eps_fraction)}};
}

} // namespace detail

inline void run_rdm(const RdmConfig& cfg, std::uint64_t seed, std::ostream& os) {
  csv::Writer w(os);
  write_config(w, "rdm", seed, detail::rdm_params(cfg));
  w.header({"n", "r_max", "welfare_dsic", "welfare_tent"});
  detail::rdm_rows(cfg, w);
}

inline void run_fig1(const RdmConfig& cfg, std::uint64_t seed, std::ostream& os) {
  csv::Writer w(os);
  write_config(w, "figure fig1", seed, detail::rdm_params(cfg));
  w.header({"n", "rmax_welfare", "dsic_welfare", "tent_welfare"});
  detail::rdm_rows(cfg, w);
}

// ---------------------------------------------------------------------------------------------

struct CakeConfig {
  int n = 3;
  std::size_t samples = 10'000;
  /// Declared (= true) measures; n uniform measures when empty.
  std::vector<cake::PiecewiseMeasure> measures;
  std::string measures_source = "uniform";
};

inline std::vector<cake::PiecewiseMeasure> read_measures(std::istream& in) {
  std::vector<cake::PiecewiseMeasure> out;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    out.push_back(cake::PiecewiseMeasure::parse(line));
  }
  if (out.empty()) throw ConfigError("measures file has no measures");
  return out;
}

inline void run_cake(CakeConfig cfg, std::uint64_t seed, std::ostream& os) {
  if (cfg.measures.empty()) {
    if (cfg.n < 1) throw ConfigError("cake: n must be >= 1");
    cfg.measures.assign(static_cast<std::size_t>(cfg.n), cake::PiecewiseMeasure::uniform());
  }
  const std::size_t n = cfg.measures.size();
  csv::Writer w(os);
  write_config(w, "cake", seed,
               {{"n", csv::format(n)},
                {"samples", csv::format(cfg.samples)},
                {"measures", cfg.measures_source}});
  w.header({"run", "identity", "value", "coin"});

  auto t = cake::simulate(cfg.measures, cfg.samples, seed);
  for (const auto& mu : t.declared) {
    for (const auto& slice : t.partition) {
      if (std::abs(cake::measure_value(mu, slice) - 1.0 / static_cast<double>(n)) > 1e-12) {
        throw InvariantViolation("cake: partition is not exact for a declared measure");
      }
    }
  }
  for (std::size_t r = 0; r < t.runs.size(); ++r) {
    auto alloc = t.allocation(r);
    for (std::size_t i = 0; i < n; ++i) {
      double v = alloc.kept ? cake::measure_value(t.declared[i], alloc.slices[i]) : 0.0;
      w.row(r, i, v, alloc.kept);
    }
  }
}

// ---------------------------------------------------------------------------------------------

struct RingRunConfig {
  std::string dist = "uniform";
  int n = 3;
  std::vector<double> thetas;
  ring::RingSearchOptions search;
};

/// "lo:hi:count" or a comma-separated list.
inline std::vector<double> parse_theta_grid(const std::string& text) {
  std::vector<double> out;
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ConfigError("bad theta grid entry '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    auto a = text.find(':');
    auto b = text.find(':', a + 1);
    if (b == std::string::npos) throw ConfigError("theta grid must be lo:hi:count");
    double lo = num(text.substr(0, a));
    double hi = num(text.substr(a + 1, b - a - 1));
    double count = num(text.substr(b + 1));
    if (count < 1 || count != std::floor(count)) throw ConfigError("theta grid count must be >= 1");
    const int m = static_cast<int>(count);
    for (int i = 0; i < m; ++i) out.push_back(m == 1 ? lo : lo + (hi - lo) * i / (m - 1));
    return out;
  }
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(',', start);
    out.push_back(num(text.substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

inline void run_ring(const RingRunConfig& cfg, std::uint64_t seed, std::ostream& os) {
  auto dist = ring::ValueDistribution::by_name(cfg.dist);
  auto opts = cfg.search;
  opts.seed = seed;
  csv::Writer w(os);
  std::ostringstream grid;
  for (std::size_t i = 0; i < cfg.thetas.size(); ++i) grid << (i ? ";" : "") << csv::format(cfg.thetas[i]);
  write_config(w, "ring", seed,
               {{"dist", dist.name()},
                {"n", csv::format(cfg.n)},
                {"samples", csv::format(opts.samples)},
                {"family", ring::families::name(opts.family)},
                {"basis", opts.basis == ring::TransferBasis::reported_identities ? "reported" : "true_members"},
                {"reserve", csv::format(opts.reserve)},
                {"theta_grid", grid.str()}});
  w.header({"theta", "truthful_ok", "sybilproof_ok", "welfare", "baseline"});
  auto res = ring::opt_ring_search(dist, cfg.n, cfg.thetas, opts);
  for (const auto& c : res.candidates) {
    w.row(c.theta, c.truthful_ok, c.sybilproof_ok, c.welfare, res.baseline);
  }
}

// ---------------------------------------------------------------------------------------------

struct CommitConfig {
  std::string instance = "cournot";
  double c = 0.0;
  int n_max = 10;
  int x_max = 32;
  double alpha = 1.0;
  double reserve_a = 100.0;
  double reserve_b = 100.0;
  double ext_price = 0.5;
};

inline commitment::CommitmentInstance make_instance(const CommitConfig& cfg) {
  using namespace commitment;
  if (cfg.instance == "cournot") {
    return {oracles::cournot(cfg.alpha, 0.0), SybilCost::linear(cfg.c), 1};
  }
  if (cfg.instance == "cfmm") {
    return {oracles::cfmm_arbitrage(cfg.reserve_a, cfg.reserve_b, cfg.ext_price),
            SybilCost::linear(cfg.c), 1};
  }
  if (cfg.instance == "exp") return {oracles::exponential(), oracles::exponential_cost(), 1};
  if (cfg.instance == "trivial") return {oracles::trivial(cfg.c), SybilCost::linear(cfg.c), 1};
  if (cfg.instance == "rmax") return {oracles::rmax_split(10.0), SybilCost::linear(cfg.c), 1};
  throw ConfigError("unknown commitment instance '" + cfg.instance +
                    "' (cournot | cfmm | exp | trivial | rmax)");
}

inline Params commit_params(const CommitConfig& cfg) {
  return {{"instance", cfg.instance},
          {"c", csv::format(cfg.c)},
          {"n_max", csv::format(cfg.n_max)},
          {"x_max", csv::format(cfg.x_max)}};
}

inline void run_commit(const CommitConfig& cfg, std::uint64_t seed, std::ostream& os) {
  if (cfg.n_max < 1) throw ConfigError("commit: n-max must be >= 1");
  auto inst = make_instance(cfg);
  csv::Writer w(os);
  write_config(w, "commit", seed, commit_params(cfg));
  if (!inst.oracle.warning.empty()) w.comment("warning: " + inst.oracle.warning);
  w.header({"n", "eq_payoff", "commit2_payoff", "scp_verdict"});
  for (int n = 1; n <= cfg.n_max; ++n) {
    const int foreign = n - 1;
    const double eq = commitment::commitment_value(inst, 1, foreign);
    const double two = commitment::commitment_value(inst, 2, foreign);
    auto ce = commitment::scp_check_at(inst, foreign, cfg.x_max, 1e-12, nullptr);
    std::string verdict = ce ? "counterexample x=" + std::to_string(ce->x) : "scp";
    w.row(n, eq, two, verdict);
  }
}

inline void run_fig2(const CommitConfig& cfg, std::uint64_t seed, std::ostream& os) {
  if (cfg.n_max < 1) throw ConfigError("fig2: n-max must be >= 1");
  auto oracle = commitment::oracles::cfmm_arbitrage(cfg.reserve_a, cfg.reserve_b, cfg.ext_price);
  csv::Writer w(os);
  write_config(w, "figure fig2", seed,
               {{"reserve_a", csv::format(cfg.reserve_a)},
                {"reserve_b", csv::format(cfg.reserve_b)},
                {"ext_price", csv::format(cfg.ext_price)},
                {"n_max", csv::format(cfg.n_max)}});
  if (!oracle.warning.empty()) w.comment("warning: " + oracle.warning);
  w.header({"n", "eq_payoff", "sybil_commit_payoff"});
  for (int n = 1; n <= cfg.n_max; ++n) w.row(n, oracle.payoff(n), 2.0 * oracle.payoff(n + 1));
}

// ---------------------------------------------------------------------------------------------

struct VerifyConfig {
  std::string game = "participation";
  double param = 1.0; // R, beta or the bidder's value
  double c = 0.0;
  int max_identities = 3;
  std::vector<std::vector<double>> foreign = {{1.0}, {1.0, 1.0}};
  double grid_step = 0.05;
  double search_upper = 2.0;
};

inline AggregativeGame make_game(const VerifyConfig& cfg) {
  if (cfg.game == "participation") return games::participation(cfg.param);
  if (cfg.game == "cournot") return games::cournot(cfg.param, cfg.grid_step);
  if (cfg.game == "exponential") return games::exponential(cfg.search_upper, cfg.grid_step);
  if (cfg.game == "second_price") return games::second_price(cfg.param, cfg.search_upper, cfg.grid_step);
  if (cfg.game == "reward_share") {
    return games::reward_share(cfg.param, cfg.c, cfg.search_upper, cfg.grid_step);
  }
  throw ConfigError("unknown game '" + cfg.game +
                    "' (participation | cournot | exponential | second_price | reward_share)");
}

inline std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + csv::format(xs[i]);
  return s;
}

inline void run_verify(const VerifyConfig& cfg, std::uint64_t seed, std::ostream& os) {
  auto game = make_game(cfg);
  // reward_share already charges c per unit of action; the identity cost is zero there
  auto cost = cfg.game == "reward_share" ? SybilCost::zero() : SybilCost::linear(cfg.c);
  VerifierOptions opts;
  opts.search_upper = cfg.search_upper;
  auto verdict = verify_sybilproof(game, cost, cfg.max_identities, cfg.foreign, opts);

  csv::Writer w(os);
  std::string foreign;
  for (std::size_t i = 0; i < cfg.foreign.size(); ++i) foreign += (i ? ";" : "") + join(cfg.foreign[i]);
  write_config(w, "verify", seed,
               {{"game", cfg.game},
                {"param", csv::format(cfg.param)},
                {"c", csv::format(cfg.c)},
                {"max_identities", csv::format(cfg.max_identities)},
                {"grid_step", csv::format(cfg.grid_step)},
                {"search_upper", csv::format(cfg.search_upper)},
                {"foreign", foreign}});
  w.header({"game", "verdict", "resolution", "strategies_checked", "mine", "foreign", "gain"});
  if (verdict.proof()) {
    w.row(game.name, "proof", verdict.resolution, verdict.strategies_checked, "", "", 0.0);
  } else {
    const auto& ce = *verdict.counterexample;
    w.row(game.name, "counterexample", verdict.resolution, verdict.strategies_checked, join(ce.mine),
          join(ce.foreign), ce.gain);
  }
}

// ---------------------------------------------------------------------------------------------

struct PoaConfig {
  double reward = 10.0;
  double c = 1.0;
  int n_max = 10;
  double grid_step = 1e-3;
};

inline void run_poa(const PoaConfig& cfg, std::uint64_t seed, std::ostream& os) {
  if (cfg.n_max < 2) throw ConfigError("poa: n-max must be >= 2");
  auto game = games::reward_share(cfg.reward, cfg.c, cfg.reward / cfg.c, cfg.grid_step);
  csv::Writer w(os);
  write_config(w, "poa", seed,
               {{"R", csv::format(cfg.reward)},
                {"c", csv::format(cfg.c)},
                {"n_max", csv::format(cfg.n_max)},
                {"grid_step", csv::format(cfg.grid_step)}});
  w.header({"n", "eq_welfare", "opt_welfare", "poa"});
  for (int n = 2; n <= cfg.n_max; ++n) {
    auto eq = reward_game_pure_equilibrium(cfg.reward, cfg.c, n);
    auto p = price_of_anarchy(game, n, eq.welfare);
    w.row(n, eq.welfare, p.optimal_welfare, p.poa);
  }
}

} // namespace sybil::experiments
