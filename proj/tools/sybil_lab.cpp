// sybil_lab: command-line driver for the experiments in sybil/experiments.hpp.
//
// Exit codes: 0 success, 1 usage, 2 invariant violation, 3 numeric failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sybil/sybil.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kInvariant = 2, kNumeric = 3 };

/// "x1 x2;y1;z1 z2" -> {{x1, x2}, {y1}, {z1, z2}}; an empty group is the empty profile.
std::vector<std::vector<double>> parse_profiles(const std::string& text) {
  std::vector<std::vector<double>> out;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::istringstream in(group);
    std::vector<double> profile;
    double v;
    while (in >> v) profile.push_back(v);
    if (!in.eof()) throw sybil::ConfigError("bad foreign profile '" + group + "'");
    out.push_back(std::move(profile));
  }
  if (out.empty()) throw sybil::ConfigError("no foreign profiles given");
  return out;
}

} // namespace

int main(int argc, char** argv) {
  namespace ex = sybil::experiments;
  CLI::App app{"Sybil mechanism-design lab: solves and verifies Sybil extension games, emits CSV"};
  app.set_version_flag("--version", std::string(ex::kVersion));
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out = "-";
  std::string format = "csv";
  app.add_option("--seed", seed, "Seed for every stochastic output")->capture_default_str();
  app.add_option("--out", out, "Output path ('-' for stdout)")->capture_default_str();
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv"}))->capture_default_str();

  ex::VerifyConfig verify;
  std::string foreign_spec = "1;1 1";
  auto* verify_cmd = app.add_subcommand("verify", "Brute-force Sybil-proofness check of a game");
  verify_cmd->add_option("--game", verify.game, "participation | cournot | exponential | second_price | reward_share")
      ->capture_default_str();
  verify_cmd->add_option("--param", verify.param, "R, beta or the bidder's value")->capture_default_str();
  verify_cmd->add_option("--c", verify.c, "Linear identity cost (unit action cost for reward_share)")
      ->capture_default_str();
  verify_cmd->add_option("--max-identities", verify.max_identities)->capture_default_str();
  verify_cmd->add_option("--foreign", foreign_spec, "Foreign profiles, e.g. \"1;1 1\"")->capture_default_str();
  verify_cmd->add_option("--grid-step", verify.grid_step)->capture_default_str();
  verify_cmd->add_option("--search-upper", verify.search_upper)->capture_default_str();

  ex::RdmConfig rdm;
  auto* rdm_cmd = app.add_subcommand("rdm", "Reward-distribution mechanisms: r_max, DSIC and tent welfare");
  rdm_cmd->add_option("--R", rdm.reward)->capture_default_str();
  rdm_cmd->add_option("--n-max", rdm.n_max)->capture_default_str();
  rdm_cmd->add_option("--K", rdm.scale)->capture_default_str();
  rdm_cmd->add_option("--eps-fraction", rdm.eps_fraction, "Tent epsilon as a fraction of K")->capture_default_str();

  ex::CakeConfig cake;
  std::string measures_file;
  auto* cake_cmd = app.add_subcommand("cake", "Sybil-proof cake-cutting Monte Carlo");
  cake_cmd->add_option("--n", cake.n, "Number of uniform measures when no file is given")->capture_default_str();
  cake_cmd->add_option("--samples", cake.samples)->capture_default_str();
  cake_cmd->add_option("--measures", measures_file, "File with one 'b0 d0 b1 ... bm' measure per line");

  ex::RingRunConfig ring;
  std::string theta_grid = "0:1:21";
  std::string family = "pie";
  std::string basis = "reported";
  auto* ring_cmd = app.add_subcommand("ring", "Search for profitable Sybil-proof bidding rings");
  ring_cmd->add_option("--dist", ring.dist, "uniform | texp | beta22")->capture_default_str();
  ring_cmd->add_option("--n", ring.n)->capture_default_str();
  ring_cmd->add_option("--theta-grid", theta_grid, "lo:hi:count or a comma list")->capture_default_str();
  ring_cmd->add_option("--samples", ring.search.samples)->capture_default_str();
  ring_cmd->add_option("--family", family, "pie | const")->capture_default_str();
  ring_cmd->add_option("--basis", basis, "reported | true_members")->capture_default_str();
  ring_cmd->add_option("--reserve", ring.search.reserve)->capture_default_str();

  ex::CommitConfig commit;
  auto* commit_cmd = app.add_subcommand("commit", "Sybil-commitment games: committed payoffs and SCP verdicts");
  commit_cmd->add_option("--instance", commit.instance, "cournot | cfmm | exp | trivial | rmax")
      ->capture_default_str();
  commit_cmd->add_option("--c", commit.c, "Linear identity cost")->capture_default_str();
  commit_cmd->add_option("--n-max", commit.n_max)->capture_default_str();
  commit_cmd->add_option("--x-max", commit.x_max)->capture_default_str();

  ex::PoaConfig poa;
  auto* poa_cmd = app.add_subcommand("poa", "Price of anarchy of the reward game");
  poa_cmd->add_option("--R", poa.reward)->capture_default_str();
  poa_cmd->add_option("--c", poa.c)->capture_default_str();
  poa_cmd->add_option("--n-max", poa.n_max)->capture_default_str();
  poa_cmd->add_option("--grid-step", poa.grid_step)->capture_default_str();

  std::string which;
  ex::RdmConfig fig1;
  ex::CommitConfig fig2;
  auto* fig_cmd = app.add_subcommand("figure", "Figure data: fig1 (RDM welfare) or fig2 (CFMM commitment)");
  fig_cmd->add_option("which", which)->required()->check(CLI::IsMember({"fig1", "fig2"}));
  fig_cmd->add_option("--R", fig1.reward)->capture_default_str();
  int fig_n_max = 0;
  fig_cmd->add_option("--n-max", fig_n_max, "Largest n (default 12 for fig1, 10 for fig2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    std::ostringstream buf;
    if (*verify_cmd) {
      verify.foreign = parse_profiles(foreign_spec);
      ex::run_verify(verify, seed, buf);
    } else if (*rdm_cmd) {
      ex::run_rdm(rdm, seed, buf);
    } else if (*cake_cmd) {
      if (!measures_file.empty()) {
        std::ifstream in(measures_file);
        if (!in) throw sybil::ConfigError("cannot read measures file '" + measures_file + "'");
        cake.measures = ex::read_measures(in);
        cake.measures_source = measures_file;
      }
      ex::run_cake(cake, seed, buf);
    } else if (*ring_cmd) {
      ring.thetas = ex::parse_theta_grid(theta_grid);
      ring.search.family = sybil::ring::families::parse(family);
      if (basis == "reported") {
        ring.search.basis = sybil::ring::TransferBasis::reported_identities;
      } else if (basis == "true_members") {
        ring.search.basis = sybil::ring::TransferBasis::true_members;
      } else {
        throw sybil::ConfigError("unknown basis '" + basis + "' (reported | true_members)");
      }
      ex::run_ring(ring, seed, buf);
    } else if (*commit_cmd) {
      ex::run_commit(commit, seed, buf);
    } else if (*poa_cmd) {
      ex::run_poa(poa, seed, buf);
    } else if (*fig_cmd) {
      if (which == "fig1") {
        if (fig_n_max) fig1.n_max = fig_n_max;
        ex::run_fig1(fig1, seed, buf);
      } else {
        if (fig_n_max) fig2.n_max = fig_n_max;
        ex::run_fig2(fig2, seed, buf);
      }
    }

    if (out == "-") {
      std::cout << buf.str();
    } else {
      std::ofstream file(out, std::ios::binary);
      if (!file) throw sybil::ConfigError("cannot write '" + out + "'");
      file << buf.str();
      if (!file) throw sybil::ConfigError("write to '" + out + "' failed");
    }
  } catch (const sybil::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const sybil::NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}
