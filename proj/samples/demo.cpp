// Small tour of the library: a Sybil attack on a participation reward, the optimal
// Sybil-proof reward schedule, and a commitment game where splitting pays.

#include <cstdio>

#include "sybil/sybil.hpp"

int main() {
  using namespace sybil;

  auto game = games::participation(10.0);
  auto cost = SybilCost::linear(0.1);
  std::printf("one identity vs 3 others:  %.3f\n", sybil_payoff(game, cost, {1.0}, {1.0, 1.0, 1.0}));
  std::printf("two identities vs 3 others: %.3f\n", sybil_payoff(game, cost, {1.0, 1.0}, {1.0, 1.0, 1.0}));

  auto verdict = verify_sybilproof(game, cost, 3, {{1.0}, {1.0, 1.0}});
  if (verdict.counterexample) {
    std::printf("verifier: %zu identities gain %.3f\n", verdict.counterexample->mine.size(),
                verdict.counterexample->gain);
  }

  std::printf("\n n   r_max   DSIC welfare\n");
  for (int n = 1; n <= 6; ++n) std::printf("%2d  %6.3f  %6.3f\n", n, rmax(n, 10.0), dsic_welfare(n, 10.0));
  std::printf("r_max Sybil-proof: %s\n",
              check_rdm_sybilproof(mechanisms::optimal(10.0)).proof() ? "yes" : "no");

  commitment::CommitmentInstance cournot{commitment::oracles::cournot(1.0, 0.0), SybilCost::zero(), 2};
  auto br = commitment::commitment_best_response(cournot, 1);
  std::printf("\nCournot duopoly: commit %d identities for %.4f (vs %.4f alone)\n", br.x, br.value,
              commitment::commitment_value(cournot, 1, 1));
}
