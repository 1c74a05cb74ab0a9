#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "druin/exact_ruin.hpp"
#include "druin/nbm_ruin.hpp"
#include "druin/pk_eval.hpp"
#include "generators.hpp"

using namespace druin;

TEST(CbarSequence, GeometricClaims) {
  for (double p : {0.55, 0.6, 0.8}) {
    const auto seq = cbar_sequence(NbmSpec{{1.0}, p}, 200);
    const double r = (1 - p) / p;
    for (std::size_t k = 0; k <= 200; ++k) {
      EXPECT_NEAR(seq.cbar[k], std::pow(r, k + 1.0), 1e-14) << p << " " << k;
    }
  }
}

TEST(CbarSequence, FirstCoefficientIsMean) {
  const NbmSpec s{{0.2, 0.3, 0.5}, 0.8};
  const auto seq = cbar_sequence(s, 5);
  EXPECT_NEAR(seq.cbar[0], s.mean_count() * 0.25, 1e-15);
  EXPECT_NEAR(seq.rho, 1.0 - seq.cbar[0], 1e-15);
}

TEST(CbarSequence, MatchesScaledNStarTail) {
  const NbmSpec s{{0.5, 0.5}, 0.8};
  const auto seq = cbar_sequence(s, 200);
  const auto ns = nstar_sequence(seq.f_ne, seq.rho, 200);
  for (std::size_t k = 0; k <= 200; ++k) {
    EXPECT_NEAR(seq.cbar[k], (1 - seq.rho) * ns.fbar_nstar[k], 1e-12) << k;
  }
}

TEST(CbarSequence, PropertyInvariants) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 30; ++t) {
    const auto s = gen::random_nbm(rng);
    const auto seq = cbar_sequence(s, 400);
    const auto ns = nstar_sequence(seq.f_ne, seq.rho, 400);
    EXPECT_LT(seq.cbar[0], 1.0);
    for (std::size_t k = 0; k <= 400; ++k) {
      EXPECT_GE(seq.cbar[k], 0.0);
      EXPECT_LE(seq.cbar[k] / (1 - seq.rho), 1.0 + 1e-12);
      if (k > 0) {
        EXPECT_LE(seq.cbar[k], seq.cbar[k - 1] * (1 + 1e-14));
      }
      EXPECT_NEAR(seq.cbar[k], (1 - seq.rho) * ns.fbar_nstar[k], 1e-12);
    }
  }
}

TEST(CbarSequence, NetProfitRequired) {
  EXPECT_THROW(cbar_sequence(NbmSpec{{1.0}, 0.5}, 5), DomainError);
  EXPECT_THROW(cbar_sequence(NbmSpec{{0.0, 1.0}, 0.6}, 5), DomainError);
}

TEST(NStarSequence, PointMassIsTruncatedGeometric) {
  const double rho = 0.3;
  const auto ns = nstar_sequence({1.0}, rho, 50);
  for (std::size_t k = 1; k <= 50; ++k) {
    EXPECT_NEAR(ns.f_nstar[k], rho * std::pow(1 - rho, k - 1.0), 1e-15);
  }
}

TEST(NStarSequence, FirstTermAndTailIdentity) {
  const std::vector<double> w = {0.3, 0.0, 0.2, 0.5};
  const double rho = 0.45;
  const auto ns = nstar_sequence(w, rho, 300);
  EXPECT_NEAR(ns.f_nstar[1], rho * w[0], 1e-16);
  double cum = 0.0;
  for (std::size_t k = 1; k <= 300; ++k) {
    cum += ns.f_nstar[k];
    EXPECT_NEAR(ns.fbar_nstar[k], 1.0 - cum, 1e-12) << k;
  }
  EXPECT_NEAR(cum, 1.0, 1e-12);
}

TEST(NStarSequence, ZeroMassAgreesWithClosedForm) {
  for (double p : {0.3, 0.6, 0.9}) {
    for (double rho : {0.2, 0.5, 0.8}) {
      const std::vector<double> w = {0.4, 0.1, 0.5};
      const auto ns = nstar_sequence(w, rho, 600);
      double g = 0.0;
      for (std::size_t k = 1; k <= 600; ++k) g += ns.f_nstar[k] * std::pow(p, static_cast<double>(k));
      EXPECT_NEAR(compound_geo_zero_mass(w, p, rho), g, 1e-12);
    }
  }
  const double p = 0.7, rho = 0.25;
  EXPECT_NEAR(compound_geo_zero_mass({1.0}, p, rho), rho * p / (1 - (1 - rho) * p), 1e-15);
  EXPECT_NEAR(compound_geo_zero_mass({0.5, 0.5}, p, 1.0), 0.5 * p + 0.5 * p * p, 1e-15);
}

TEST(PsiNbm, GeometricClaims) {
  const NbmRuin r(NbmSpec{{1.0}, 0.6}, 30);
  for (std::size_t u = 0; u <= 30; ++u) EXPECT_NEAR(r.psi(u), std::pow(2.0 / 3.0, u + 1.0), 1e-12);
}

TEST(PsiNbm, ZeroCapital) {
  const NbmSpec s{{0.1, 0.6, 0.3}, 0.85};
  EXPECT_NEAR(psi_nbm(s, 0), s.mean_count() * 0.15 / 0.85, 1e-15);
}

TEST(PsiNbm, ErlangMixedPoissonTableValue) {
  EXPECT_NEAR(psi_nbm(NbmSpec{{0.0, 1.0}, 0.75}, 1), 0.40741, 1e-5);
}

TEST(PsiNbm, MatchesRecursionAndPk) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 25; ++t) {
    const auto s = gen::random_nbm(rng);
    const auto claims = nbm_to_pmf(s, 1e-15);
    const auto a = NbmRuin(s, 20).psi_values();
    const auto b = psi_recursion(claims, 20);
    const auto c = psi_pk_values(claims, 20, 1e-12);
    for (std::size_t u = 0; u <= 20; ++u) {
      EXPECT_NEAR(a[u], b[u], 1e-8) << t << " " << u;
      EXPECT_NEAR(a[u], c[u], 1e-8) << t << " " << u;
      if (u > 0) {
        EXPECT_LE(a[u], a[u - 1] + 1e-15);
      }
    }
  }
}

TEST(PsiNbm, QueriesBeyondBuildRangeRejected) {
  const NbmRuin r(NbmSpec{{1.0}, 0.6}, 3);
  EXPECT_THROW(r.psi(4), DomainError);
}
