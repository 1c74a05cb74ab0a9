#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "druin/errors.hpp"
#include "druin/exact_ruin.hpp"
#include "druin/mixing.hpp"
#include "druin/nbm_ruin.hpp"
#include "druin/numeric.hpp"
#include "druin/rng.hpp"

namespace druin {

struct MpApproxConfig {
  std::size_t n = 500;
  std::size_t m = 1000;
  double pmf_floor = 1e-5;
  double grid_tol = 1e-10;
  std::size_t grid_cap = std::size_t{1} << 27;
  std::uint64_t seed = 20240601;

  void validate() const {
    if (n < 1) throw DomainError("MpApproxConfig: n must be >= 1");
    if (m < 1) throw DomainError("MpApproxConfig: m must be >= 1");
    if (!(pmf_floor > 0.0)) throw DomainError("MpApproxConfig: pmf floor must be positive");
    if (!(grid_tol > 0.0)) throw DomainError("MpApproxConfig: grid tolerance must be positive");
  }
};

/// Coefficients Cbar_{k,n} for MP(F_Lambda) claims on the 1/n grid, with
/// Cbar_{0,n} fixed to E(Lambda).
struct MpCoefficientSeq {
  std::vector<double> cbar_n;
  double c0 = 0.0;
  std::vector<double> f_ne;     // f_ne[i-1] = Fbar_Lambda((i-1)/n) / grid_sum, i = 1..k_max
  std::vector<double> fbar_ne;  // fbar_ne[k] = sum_{j>=k} Fbar_Lambda(j/n) / grid_sum
  double grid_sum = 0.0;        // sum_{j>=0} Fbar_Lambda(j/n), truncated
  std::size_t grid_terms = 0;   // number of grid values summed
  double last_grid_value = 0.0; // Fbar_Lambda at the truncation point
  std::size_t n = 0;
};

inline MpCoefficientSeq mp_coefficients(const MixingDistribution& mix, const MpApproxConfig& cfg,
                                        std::size_t k_max) {
  cfg.validate();
  const double mean = mix.mean();
  require_net_profit(mean, "mp_coefficients");
  const double nd = static_cast<double>(cfg.n);

  MpCoefficientSeq seq;
  seq.n = cfg.n;
  seq.c0 = mean;
  // grid values Fbar(j/n): keep j <= k_max, sum until below grid_tol
  std::vector<double> grid;
  grid.reserve(k_max + 1);
  CompensatedSum total;
  std::size_t j = 0;
  for (;; ++j) {
    if (j > cfg.grid_cap) {
      throw BudgetError("mp_coefficients: grid sum needs more than " + std::to_string(cfg.grid_cap) +
                        " terms for " + mix.describe());
    }
    const double g = mix.survival(static_cast<double>(j) / nd);
    if (j <= k_max) grid.push_back(g);
    total += g;
    if (g < cfg.grid_tol && j >= k_max) {
      seq.last_grid_value = g;
      break;
    }
  }
  seq.grid_terms = j + 1;
  const long double s = total.value();
  seq.grid_sum = static_cast<double>(s);

  seq.f_ne.resize(k_max);
  for (std::size_t i = 1; i <= k_max; ++i) seq.f_ne[i - 1] = static_cast<double>(grid[i - 1] / s);
  seq.fbar_ne.resize(k_max + 1);
  CompensatedSum head;
  for (std::size_t k = 0; k <= k_max; ++k) {
    seq.fbar_ne[k] = std::max(0.0, static_cast<double>((s - head.value()) / s));
    head += grid[k];
  }
  seq.cbar_n = detail::coefficient_recursion(mean, seq.f_ne, seq.fbar_ne, k_max);
  return seq;
}

/// Largest x > u n with nb(u, 1/(1+n))(x) > floor; u n itself when no such x.
inline std::size_t truncation_index(std::size_t u, std::size_t n, double floor) {
  const double q = 1.0 / (static_cast<double>(n) + 1.0);
  const double ud = static_cast<double>(u);
  std::size_t x = u * n + 1;
  double v = std::exp(log_negbin_pmf(ud, q, static_cast<double>(x)));
  if (!(v > floor)) return u * n;
  for (;;) {
    const double next = v * (ud + static_cast<double>(x)) / (static_cast<double>(x) + 1.0) * (1.0 - q);
    if (!(next > floor)) return x;
    v = next;
    ++x;
  }
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Both approximation methods for MP(F_Lambda) claims over a shared,
/// immutable coefficient sequence long enough for every u <= u_max.
class MpRuinApprox {
 public:
  static constexpr double kWindowTol = 1e-16;

  MpRuinApprox(MixingDistribution mix, const MpApproxConfig& cfg, std::size_t u_max)
      : mix_(std::move(mix)), cfg_(cfg), u_max_(u_max) {
    cfg_.validate();
    std::size_t k_max = 0;
    if (u_max >= 1) {
      k_max = truncation_index(u_max, cfg_.n, cfg_.pmf_floor);
      k_max = std::max(k_max, negbin_window(static_cast<double>(u_max), success(), kWindowTol).last());
    }
    seq_ = mp_coefficients(mix_, cfg_, k_max);
  }

  const MpCoefficientSeq& coefficients() const { return seq_; }
  const MpApproxConfig& config() const { return cfg_; }
  const MixingDistribution& mixing() const { return mix_; }
  double success() const { return 1.0 / (static_cast<double>(cfg_.n) + 1.0); }

  /// Truncated sum over k = 0..k*, k* from the pmf floor rule.
  double method1(std::size_t u) const {
    check_u(u);
    if (u == 0) return seq_.c0;
    const std::size_t k_star = truncation_index(u, cfg_.n, cfg_.pmf_floor);
    const PmfWindow w = negbin_window(static_cast<double>(u), success(), kWindowTol);
    CompensatedSum s;
    for (std::size_t k = w.first; k <= std::min(k_star, w.last()); ++k) {
      s += w.at(k) * seq_.cbar_n[k];
    }
    return static_cast<double>(s.value());
  }

  /// E(Cbar_{Z,n}) without the floor truncation (NegBin tails < 1e-16).
  double method1_full(std::size_t u) const {
    check_u(u);
    if (u == 0) return seq_.c0;
    return detail::negbin_expectation(seq_.cbar_n, u, success(), kWindowTol);
  }

  /// Sample mean of Cbar_{z_i,n} over m NegBin(u, 1/(1+n)) draws. Draw i is
  /// the sum of the first u geometric variates of the counter stream (seed, i),
  /// so z_i is nondecreasing in u and the estimates are nonincreasing in u.
  MonteCarloEstimate method2(std::size_t u, std::uint64_t seed) const {
    check_u(u);
    if (u == 0) return {seq_.c0, 0.0};
    const double log1m_q = std::log1p(-success());
    std::vector<std::uint64_t> draws(cfg_.m);
    std::uint64_t z_max = 0;
    for (std::size_t i = 0; i < cfg_.m; ++i) {
      CounterRng rng(seed, {static_cast<std::uint64_t>(i)});
      std::uint64_t z = 0;
      for (std::size_t r = 0; r < u; ++r) z += rng.geometric_failures(log1m_q);
      draws[i] = z;
      z_max = std::max(z_max, z);
    }
    const std::vector<double>* cbar = &seq_.cbar_n;
    std::vector<double> extended;
    if (z_max >= seq_.cbar_n.size()) {
      // draw beyond the precomputed range (probability < 1e-16 per draw)
      extended = mp_coefficients(mix_, cfg_, static_cast<std::size_t>(z_max)).cbar_n;
      cbar = &extended;
    }
    CompensatedSum sum, sum_sq;
    for (std::uint64_t z : draws) {
      const double c = (*cbar)[static_cast<std::size_t>(z)];
      sum += c;
      sum_sq += static_cast<long double>(c) * c;
    }
    const long double md = static_cast<long double>(cfg_.m);
    const long double mean = sum.value() / md;
    MonteCarloEstimate out;
    out.estimate = static_cast<double>(mean);
    if (cfg_.m > 1) {
      const long double var = std::max(0.0L, (sum_sq.value() - md * mean * mean) / (md - 1.0L));
      out.std_error = static_cast<double>(std::sqrt(var / md));
    } else {
      out.std_error = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
  }

  MonteCarloEstimate method2(std::size_t u) const { return method2(u, cfg_.seed); }

 private:
  void check_u(std::size_t u) const {
    if (u > u_max_) throw DomainError("MpRuinApprox: u beyond the u_max it was built for");
  }

  MixingDistribution mix_;
  MpApproxConfig cfg_;
  std::size_t u_max_;
  MpCoefficientSeq seq_;
};

inline double psi_mp_method1(const MixingDistribution& mix, std::size_t u, const MpApproxConfig& cfg = {}) {
  return MpRuinApprox(mix, cfg, u).method1(u);
}

inline MonteCarloEstimate psi_mp_method2(const MixingDistribution& mix, std::size_t u,
                                         const MpApproxConfig& cfg = {}) {
  return MpRuinApprox(mix, cfg, u).method2(u);
}

/// Exact psi(0..u_max) for MP claims: mp_pmf feeds the forward recursion.
inline std::vector<double> psi_mp_exact_reference(const MixingDistribution& mix, std::size_t u_max) {
  require_net_profit(mix.mean(), "psi_mp_exact_reference");
  return psi_recursion(mp_claims(mix, u_max), u_max);
}

}  // namespace druin
