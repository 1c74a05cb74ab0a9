#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "druin/distributions.hpp"
#include "druin/errors.hpp"
#include "druin/exact_ruin.hpp"
#include "druin/numeric.hpp"

namespace druin {

namespace detail {

/// Cbar_k = c0 [ sum_{i=1}^{k} f_ne(i) Cbar_{k-i} + Fbar_ne(k) ], Cbar_0 = c0.
/// f_ne[i-1] holds f_ne(i) (zero past its end); fbar_ne[k] holds Fbar_ne(k).
inline std::vector<double> coefficient_recursion(double c0, const std::vector<double>& f_ne,
                                                 const std::vector<double>& fbar_ne,
                                                 std::size_t k_max) {
  std::vector<double> cbar(k_max + 1, 0.0);
  cbar[0] = c0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const std::size_t top = std::min(k, f_ne.size());
    long double s = 0.0L;
    for (std::size_t i = 1; i <= top; ++i) {
      s += static_cast<long double>(f_ne[i - 1]) * cbar[k - i];
    }
    s += k < fbar_ne.size() ? fbar_ne[k] : 0.0;
    cbar[k] = static_cast<double>(c0 * s);
  }
  return cbar;
}

/// sum_k cbar[k] nb(u, success)(k) over the NegBin window; cbar must cover it.
inline double negbin_expectation(const std::vector<double>& cbar, std::size_t u, double success,
                                 double tail_tol) {
  const PmfWindow w = negbin_window(static_cast<double>(u), success, tail_tol);
  if (w.last() >= cbar.size()) {
    throw BudgetError("negbin_expectation: coefficient sequence shorter than NegBin window");
  }
  CompensatedSum s;
  for (std::size_t j = 0; j < w.values.size(); ++j) s += w.values[j] * cbar[w.first + j];
  return static_cast<double>(s.value());
}

}  // namespace detail

/// The sequence {Cbar_k} for NBM(pi, p) claims.
struct CoefficientSeq {
  std::vector<double> cbar;
  double rho = 0.0;              // 1 - psi(0)
  std::vector<double> f_ne;      // f_ne[i-1] = f_Ne(i) = P(N > i-1) / E(N)
  std::vector<double> fbar_ne;   // fbar_ne[k] = P(N_e > k), k = 0..k_max
  NbmSpec source;
};

inline CoefficientSeq cbar_sequence(const NbmSpec& spec, std::size_t k_max) {
  spec.validate();
  const double en = spec.mean_count();
  if (!std::isfinite(en)) throw DomainError("cbar_sequence: E(N) is not finite");
  const double c0 = en * (1.0 - spec.p) / spec.p;
  require_net_profit(c0, "cbar_sequence");

  CoefficientSeq seq;
  seq.source = spec;
  seq.rho = 1.0 - c0;
  const NbmSpec eq = nbm_equilibrium(spec);
  seq.f_ne = eq.weights;
  seq.fbar_ne.assign(k_max + 1, 0.0);
  {
    // suffix sums of f_Ne
    std::vector<double> suffix(seq.f_ne.size() + 1, 0.0);
    CompensatedSum t;
    for (std::size_t i = seq.f_ne.size(); i-- > 0;) {
      t += seq.f_ne[i];
      suffix[i] = static_cast<double>(t.value());
    }
    // Fbar_ne(k) = sum_{i > k} f_Ne(i) = suffix[k]
    for (std::size_t k = 0; k <= k_max && k < suffix.size(); ++k) seq.fbar_ne[k] = suffix[k];
  }
  seq.cbar = detail::coefficient_recursion(c0, seq.f_ne, seq.fbar_ne, k_max);
  return seq;
}

/// Distribution of N* = N_1 + ... + N_M, M ~ TGeometric(rho), N_j ~ weights.
struct NStarSeq {
  std::vector<double> f_nstar;     // index k, f_nstar[0] = 0
  std::vector<double> fbar_nstar;  // index k, fbar_nstar[0] = 1
  double rho = 0.0;
};

inline NStarSeq nstar_sequence(const std::vector<double>& weights, double rho, std::size_t k_max) {
  if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("nstar_sequence: rho must lie in (0,1]");
  NbmSpec{weights, 0.5, 0.0}.validate(1e-10);
  auto fn = [&](std::size_t k) { return (k >= 1 && k <= weights.size()) ? weights[k - 1] : 0.0; };
  std::vector<double> fbar_n(k_max + 1, 0.0);
  {
    CompensatedSum cum;
    for (std::size_t k = 0; k <= k_max; ++k) {
      cum += fn(k);
      fbar_n[k] = std::max(0.0, static_cast<double>(1.0L - cum.value()));
    }
  }
  NStarSeq out;
  out.rho = rho;
  out.f_nstar.assign(k_max + 1, 0.0);
  out.fbar_nstar.assign(k_max + 1, 0.0);
  out.fbar_nstar[0] = 1.0;
  const long double keep = 1.0L - rho;
  for (std::size_t k = 1; k <= k_max; ++k) {
    long double s = 0.0L;
    for (std::size_t i = 1; i < k; ++i) s += static_cast<long double>(fn(i)) * out.f_nstar[k - i];
    out.f_nstar[k] = static_cast<double>(keep * s + rho * fn(k));
    long double t = 0.0L;
    for (std::size_t j = 1; j <= k; ++j) t += static_cast<long double>(fn(j)) * out.fbar_nstar[k - j];
    out.fbar_nstar[k] = static_cast<double>(keep * t + fbar_n[k]);
  }
  return out;
}

/// P(S = 0) = rho G_N(p) / (1 - (1 - rho) G_N(p)) for the compound
/// truncated-geometric sum of NBM(pi, p) variables.
inline double compound_geo_zero_mass(const std::vector<double>& weights, double p, double rho) {
  CompensatedSum g;
  double pk = 1.0;
  for (double q : weights) {
    pk *= p;
    g += q * pk;
  }
  const double gn = static_cast<double>(g.value());
  return rho * gn / (1.0 - (1.0 - rho) * gn);
}

/// psi(u) = E(Cbar_{Z_u}), Z_u ~ NegBin(u, 1 - p), for NBM(pi, p) claims.
/// Coefficients are computed once, long enough for every u <= u_max.
class NbmRuin {
 public:
  NbmRuin(const NbmSpec& spec, std::size_t u_max, double tail_tol = kDefaultTailTol)
      : u_max_(u_max), tail_tol_(tail_tol) {
    std::size_t k_max = 0;
    if (u_max >= 1) k_max = negbin_window(static_cast<double>(u_max), 1.0 - spec.p, tail_tol).last();
    seq_ = cbar_sequence(spec, k_max);
  }

  const CoefficientSeq& coefficients() const { return seq_; }

  double psi(std::size_t u) const {
    if (u > u_max_) throw DomainError("NbmRuin: u beyond the u_max it was built for");
    if (u == 0) return seq_.cbar[0];
    return detail::negbin_expectation(seq_.cbar, u, 1.0 - seq_.source.p, tail_tol_);
  }

  std::vector<double> psi_values() const {
    std::vector<double> out(u_max_ + 1);
    for (std::size_t u = 0; u <= u_max_; ++u) out[u] = psi(u);
    return out;
  }

 private:
  std::size_t u_max_;
  double tail_tol_;
  CoefficientSeq seq_;
};

inline double psi_nbm(const NbmSpec& spec, std::size_t u) { return NbmRuin(spec, u).psi(u); }

}  // namespace druin
