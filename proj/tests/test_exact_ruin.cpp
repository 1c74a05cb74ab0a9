#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "druin/exact_ruin.hpp"
#include "druin/mixing.hpp"
#include "oracles.hpp"

using namespace druin;

namespace {

// Random claim law on {0..len-1} with f(0) > 0 and mean below `mean_cap`.
DiscretePmf random_claims(std::mt19937_64& gen, double mean_cap = 0.95) {
  std::uniform_int_distribution<int> len_d(2, 8);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  for (;;) {
    std::vector<double> f(len_d(gen));
    double total = 0.0;
    for (auto& v : f) total += (v = w(gen) * w(gen));
    f[0] += total;  // keeps the mean low and f(0) positive
    total *= 2.0;
    double mean = 0.0;
    for (std::size_t y = 0; y < f.size(); ++y) mean += y * (f[y] /= total);
    if (mean < mean_cap) return DiscretePmf::complete(f);
  }
}

void expect_valid_psi(const std::vector<double>& psi, double mu) {
  ASSERT_FALSE(psi.empty());
  EXPECT_EQ(psi[0], mu);
  for (std::size_t u = 0; u < psi.size(); ++u) {
    EXPECT_GE(psi[u], 0.0);
    EXPECT_LE(psi[u], 1.0);
    if (u > 0) {
      EXPECT_LE(psi[u], psi[u - 1]);
    }
  }
}

}  // namespace

TEST(PsiRecursion, GeometricClaimsMatchClosedForm) {
  for (double p : {0.55, 0.6, 0.75, 0.9}) {
    const auto psi = psi_recursion(geometric_pmf(p, 1e-17), 30);
    for (std::size_t u = 0; u <= 30; ++u) {
      EXPECT_NEAR(psi[u], psi_geometric_closed(p, u), 1e-12) << p << " " << u;
    }
  }
}

TEST(PsiRecursion, NoClaimsMeansNoRuin) {
  const auto psi = psi_recursion(point_mass(0), 10);
  for (double v : psi) EXPECT_EQ(v, 0.0);
}

TEST(PsiRecursion, ErlangMixedPoissonTableValue) {
  const auto claims = mp_claims(MixingDistribution::erlang(2, 3.0), 10);
  EXPECT_NEAR(psi_recursion(claims, 10)[1], 0.40741, 5e-6);
}

TEST(PsiRecursion, RejectsZeroAtomAndNetProfitViolation) {
  EXPECT_THROW(psi_recursion(DiscretePmf::complete({0.0, 0.6, 0.4}, 1.4), 3), DomainError);
  EXPECT_THROW(psi_recursion(DiscretePmf::complete({0.0, 1.0}), 3), DomainError);
  try {
    psi_recursion(DiscretePmf::complete({0.5, 0.0, 0.5}), 3);
    FAIL() << "expected a domain error";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("net profit"), std::string::npos);
  }
}

TEST(PsiRecursion, MatchesFiniteHorizonOracle) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto claims = random_claims(gen, 0.7);
    const std::vector<double> f(claims.values().begin(), claims.values().end());
    const auto psi = psi_recursion(claims, 6);
    for (int u = 0; u <= 6; ++u) {
      EXPECT_NEAR(psi[u], oracle::finite_horizon_ruin(f, u, 3000), 1e-9) << trial << " " << u;
    }
  }
}

TEST(PsiRecursion, PropertyInvariantsOnRandomLaws) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto claims = random_claims(gen);
    const auto psi = psi_recursion(claims, 60);
    expect_valid_psi(psi, claims.mean());
    EXPECT_LT(psi_relation_residual(claims, psi), 1e-10);
  }
}

TEST(PsiRecursion, PrefixClaimsAreEnough) {
  const auto full = geometric_pmf(0.7, 1e-17);
  std::vector<double> head(full.values().begin(), full.values().begin() + 8);
  const auto psi = psi_recursion(DiscretePmf::prefix(head, full.mean()), 8);
  for (std::size_t u = 0; u <= 8; ++u) EXPECT_NEAR(psi[u], psi_geometric_closed(0.7, u), 1e-13);
  EXPECT_THROW(psi_recursion(DiscretePmf::prefix(head, full.mean()), 9), std::out_of_range);
}

TEST(PsiGeometricClosed, Values) {
  EXPECT_NEAR(psi_geometric_closed(0.6, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(psi_geometric_closed(0.75, 1), 1.0 / 9.0, 1e-15);
  EXPECT_THROW(psi_geometric_closed(0.5, 1), DomainError);
}

TEST(Conversion, BernoulliUnitClaims) {
  const CompoundBinomialSpec s{0.5, DiscretePmf::complete({0.0, 1.0})};
  const auto fy = convert_cb_to_gd(s);
  ASSERT_EQ(fy.size(), 2u);
  EXPECT_DOUBLE_EQ(fy.pmf(0), 0.5);
  EXPECT_DOUBLE_EQ(fy.pmf(1), 0.5);
  EXPECT_NEAR(gerber_recursion(s, 5)[0], 0.5, 1e-15);
}

TEST(Conversion, RoundTripAndMeans) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> fx(6, 0.0);
    double t = 0.0;
    for (std::size_t x = 1; x < fx.size(); ++x) t += (fx[x] = w(gen));
    for (auto& v : fx) v /= t;
    const auto x_law = DiscretePmf::complete(fx);
    const double p = 0.9 * w(gen) / x_law.mean() + 0.01;
    const CompoundBinomialSpec s{std::min(p, 1.0), x_law};
    const auto fy = convert_cb_to_gd(s);
    EXPECT_NEAR(fy.mean(), s.p * x_law.mean(), 1e-14);
    const auto back = convert_gd_to_cb(fy);
    EXPECT_NEAR(back.p, s.p, 1e-15);
    for (std::size_t x = 0; x < fx.size(); ++x) EXPECT_NEAR(back.claim_size.pmf(x), fx[x], 1e-15);
    EXPECT_NEAR(back.mean_claim_size(), x_law.mean(), 1e-14);
    if (s.p * x_law.mean() < 1.0) {
      const auto a = gerber_recursion(s, 20);
      const auto b = psi_recursion(fy, 20);
      EXPECT_NEAR(a[0], s.p * x_law.mean(), 1e-14);
      for (std::size_t u = 0; u <= 20; ++u) EXPECT_NEAR(a[u], b[u], 1e-12);
    }
  }
}

TEST(Conversion, GeometricClaimSizes) {
  std::vector<double> fx(80, 0.0);
  for (std::size_t x = 1; x < fx.size(); ++x) fx[x] = 0.5 * std::pow(0.5, x - 1.0);
  const CompoundBinomialSpec s{0.4, DiscretePmf::complete(fx, 2.0, 1e-12)};
  const auto a = gerber_recursion(s, 15);
  const auto b = psi_recursion(convert_cb_to_gd(s), 15);
  for (std::size_t u = 0; u <= 15; ++u) EXPECT_NEAR(a[u], b[u], 1e-12);
}

TEST(Conversion, Errors) {
  EXPECT_THROW(convert_gd_to_cb(point_mass(0)), DomainError);
  EXPECT_THROW(convert_cb_to_gd(CompoundBinomialSpec{0.5, DiscretePmf::complete({0.5, 0.5})}), DomainError);
  EXPECT_THROW(gerber_recursion(CompoundBinomialSpec{0.6, point_mass(2)}, 3), DomainError);
}
