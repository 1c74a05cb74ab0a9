#include <cstdio>

#include "druin/druin.hpp"

int main() {
  using namespace druin;

  // Geometric claims: psi(u) = ((1-p)/p)^{u+1}.
  const DiscretePmf geo = geometric_pmf(0.6);
  const auto psi = psi_recursion(geo, 5);
  std::printf("geometric(0.6)\n");
  for (std::size_t u = 0; u < psi.size(); ++u) {
    std::printf("  u=%zu  recursion=%.8f  pk=%.8f  closed=%.8f\n", u, psi[u], psi_pk(geo, u),
                psi_geometric_closed(0.6, u));
  }

  // Negative binomial mixture claims: 0.7 NegBin(1, 0.8) + 0.3 NegBin(3, 0.8).
  const NbmSpec nbm{{0.7, 0.0, 0.3}, 0.8, 0.0};
  std::printf("nbm psi(4) = %.8f\n", psi_nbm(nbm, 4));

  // Mixed Poisson claims with Erlang(2, 3) rates: exact, then the 1/n grid.
  const auto mix = MixingDistribution::erlang(2, 3.0);
  const auto exact = psi_mp_exact_reference(mix, 10);
  const MpRuinApprox approx(mix, MpApproxConfig{}, 10);
  std::printf("mixed Poisson erlang(2,3), n=500\n");
  for (std::size_t u = 0; u <= 10; u += 2) {
    const auto mc = approx.method2(u);
    std::printf("  u=%2zu  exact=%.5f  method1=%.5f  method2=%.5f (se %.5f)\n", u, exact[u], approx.method1(u),
                mc.estimate, mc.std_error);
  }

  // Simulation from one batch of paths, read at several capital levels.
  SimConfig sim;
  sim.replications = 20000;
  sim.seed = 7;
  const auto stats = simulate_paths(mp_claims_complete(mix), sim);
  std::printf("simulated psi(2) = %.4f +/- %.4f\n", stats.psi_hat_at(2), stats.std_error_at(2));

  // Whole jobs produce tables that serialize to CSV or JSON.
  JobSpec job{model::Nbm{nbm}, {}, 6, {}, {}, false};
  std::printf("%s", run(job).to_csv().c_str());
  return 0;
}
