#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "druin/distributions.hpp"
#include "druin/errors.hpp"
#include "druin/numeric.hpp"

namespace druin {

inline void require_net_profit(double mean, const char* who) {
  if (!(mean < 1.0)) {
    throw DomainError(std::string(who) + ": net profit condition violated (mean claim per period " +
                      std::to_string(mean) + " must be < 1)");
  }
}

struct RuinQuery {
  std::size_t u_max = 0;
  DiscretePmf claims;
};

/// Largest |psi(u) - sum_{y=0}^{u} f(y) psi(u+1-y) - Fbar(u)| over u < psi.size()-1.
inline double psi_relation_residual(const DiscretePmf& claims, const std::vector<double>& psi) {
  double worst = 0.0;
  for (std::size_t u = 0; u + 1 < psi.size(); ++u) {
    CompensatedSum rhs;
    for (std::size_t y = 0; y <= u; ++y) rhs += claims.pmf(y) * psi[u + 1 - y];
    rhs += claims.survival(static_cast<long long>(u));
    worst = std::max(worst, std::fabs(static_cast<double>(psi[u] - rhs.value())));
  }
  return worst;
}

/// Ultimate ruin probabilities psi(0..u_max) for the Gerber-Dickson model,
/// solving psi(u) = sum_{y=0}^{u} f(y) psi(u+1-y) + Fbar(u) forward for psi(u+1)
/// from psi(0) = mean. Only f(0..u_max-1) is read.
inline std::vector<double> psi_recursion(const RuinQuery& query, double residual_tol = 1e-10) {
  const DiscretePmf& f = query.claims;
  const double mu = f.mean();
  require_net_profit(mu, "psi_recursion");
  std::vector<double> psi(query.u_max + 1, 0.0);
  psi[0] = mu;
  if (query.u_max == 0) return psi;
  const long double f0 = f.pmf(0);
  if (!(f0 > 0.0L)) throw DomainError("psi_recursion: f(0) must be positive for the forward solve");

  std::vector<long double> lpsi(query.u_max + 1, 0.0L);
  lpsi[0] = mu;
  for (std::size_t u = 0; u < query.u_max; ++u) {
    CompensatedSum acc;
    acc += lpsi[u];
    for (std::size_t y = 1; y <= u; ++y) acc -= static_cast<long double>(f.pmf(y)) * lpsi[u + 1 - y];
    acc -= f.survival(static_cast<long long>(u));
    lpsi[u + 1] = acc.value() / f0;
    // rounding can leave values a few ulps outside [0, psi(u)]
    psi[u + 1] = std::clamp(static_cast<double>(lpsi[u + 1]), 0.0, psi[u]);
  }
  const double residual = psi_relation_residual(f, psi);
  if (!(residual < residual_tol)) {
    throw NumericError("psi_recursion: relation residual " + std::to_string(residual) +
                       " exceeds tolerance");
  }
  return psi;
}

inline std::vector<double> psi_recursion(const DiscretePmf& claims, std::size_t u_max) {
  return psi_recursion(RuinQuery{u_max, claims});
}

/// Geometric(p) claims: psi(u) = ((1-p)/p)^{u+1}.
inline double psi_geometric_closed(double p, std::size_t u) {
  if (!(p > 0.5 && p < 1.0)) {
    throw DomainError("psi_geometric_closed: net profit requires 1/2 < p < 1");
  }
  return std::pow((1.0 - p) / p, static_cast<double>(u) + 1.0);
}

/// Compound binomial model: a claim occurs with probability p per period and
/// has size X on {1, 2, ...}.
struct CompoundBinomialSpec {
  double p = 0.0;
  DiscretePmf claim_size;  // f_X; f_X(0) must be 0

  double mean_claim_size() const { return claim_size.mean(); }

  void validate() const {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("CompoundBinomialSpec: p must lie in (0,1]");
    if (claim_size.size() > 0 && claim_size.pmf(0) != 0.0) {
      throw DomainError("CompoundBinomialSpec: claim sizes live on {1,2,...}");
    }
  }
};

inline DiscretePmf convert_cb_to_gd(const CompoundBinomialSpec& spec) {
  spec.validate();
  std::vector<double> fy(std::max<std::size_t>(spec.claim_size.size(), 1), 0.0);
  fy[0] = 1.0 - spec.p;
  for (std::size_t y = 1; y < fy.size(); ++y) fy[y] = spec.p * spec.claim_size.pmf(y);
  const double mean = spec.p * spec.mean_claim_size();
  if (spec.claim_size.is_complete()) return DiscretePmf::complete(std::move(fy), mean, 1e-10);
  return DiscretePmf::prefix(std::move(fy), mean);
}

inline CompoundBinomialSpec convert_gd_to_cb(const DiscretePmf& claims) {
  const double p = 1.0 - claims.pmf(0);
  if (!(p > 0.0)) throw DomainError("convert_gd_to_cb: f_Y(0) = 1 leaves no claims to convert");
  std::vector<double> fx(claims.size(), 0.0);
  for (std::size_t x = 1; x < fx.size(); ++x) fx[x] = claims.pmf(x) / p;
  std::optional<double> mean;
  if (claims.has_mean()) mean = claims.mean() / p;
  CompoundBinomialSpec out;
  out.p = p;
  out.claim_size = claims.is_complete() ? DiscretePmf::complete(std::move(fx), mean, 1e-10)
                                        : DiscretePmf::prefix(std::move(fx), mean);
  return out;
}

/// Ruin probabilities of the compound binomial model (psi(0) = p mu_X).
inline std::vector<double> gerber_recursion(const CompoundBinomialSpec& spec, std::size_t u_max) {
  spec.validate();
  require_net_profit(spec.p * spec.mean_claim_size(), "gerber_recursion");
  return psi_recursion(convert_cb_to_gd(spec), u_max);
}

}  // namespace druin
