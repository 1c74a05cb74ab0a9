#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "druin/errors.hpp"
#include "druin/numeric.hpp"

namespace druin {

inline constexpr double kDefaultTailTol = 1e-12;

/// Probability function on {0, 1, 2, ...}.
///
/// A pmf is either *complete* (the stored values carry all mass up to a
/// truncation tolerance, and values past `support_max()` are zero) or a
/// *prefix* (only f(0..support_max) is known, the rest is unknown). Prefixes
/// are enough for the ruin recursions, which only ever read f(0..u).
class DiscretePmf {
 public:
  DiscretePmf() = default;

  /// Complete pmf. Throws if the values do not sum to one within `tol`.
  /// The mean is computed as sum of survival values unless given.
  static DiscretePmf complete(std::vector<double> pmf, std::optional<double> mean = std::nullopt,
                              double tol = kDefaultTailTol) {
    DiscretePmf d(std::move(pmf), true);
    const long double total = compensated_total(d.pmf_);
    if (std::fabs(static_cast<double>(total - 1.0L)) > tol) {
      throw DomainError("DiscretePmf: probabilities sum to " +
                        std::to_string(static_cast<double>(total)) + ", not 1");
    }
    d.residual_ = std::max(0.0, static_cast<double>(1.0L - total));
    // Survival by suffix sums keeps relative accuracy deep in the tail; the
    // truncated mass is carried by every stored survival value.
    d.survival_.assign(d.pmf_.size(), 0.0);
    CompensatedSum tail;
    tail += d.residual_;
    for (std::size_t i = d.pmf_.size(); i-- > 0;) {
      d.survival_[i] = static_cast<double>(tail.value());
      tail += d.pmf_[i];
    }
    if (mean) {
      d.mean_ = *mean;
    } else {
      d.mean_ = static_cast<double>(compensated_total(d.survival_));
    }
    return d;
  }

  /// Prefix f(0..n-1) of a pmf whose remaining mass is not stored.
  static DiscretePmf prefix(std::vector<double> pmf, std::optional<double> mean) {
    DiscretePmf d(std::move(pmf), false);
    d.survival_.resize(d.pmf_.size());
    CompensatedSum cum;
    for (std::size_t i = 0; i < d.pmf_.size(); ++i) {
      cum += d.pmf_[i];
      d.survival_[i] = static_cast<double>(1.0L - cum.value());
    }
    d.residual_ = d.pmf_.empty() ? 1.0 : std::max(0.0, d.survival_.back());
    d.mean_ = mean;
    return d;
  }

  bool is_complete() const { return complete_; }
  std::size_t support_max() const { return pmf_.empty() ? 0 : pmf_.size() - 1; }
  std::size_t size() const { return pmf_.size(); }
  /// Mass not represented by the stored values.
  double residual_mass() const { return residual_; }
  std::span<const double> values() const { return pmf_; }
  bool has_mean() const { return mean_.has_value(); }

  double mean() const {
    if (!mean_) throw DomainError("DiscretePmf: mean is unknown for this prefix");
    return *mean_;
  }

  double pmf(std::size_t x) const {
    if (x < pmf_.size()) return pmf_[x];
    if (complete_) return 0.0;
    throw std::out_of_range("DiscretePmf: pmf requested past the stored prefix");
  }

  /// P(Y > x); survival(-1) == 1.
  double survival(long long x) const {
    if (x < 0) return 1.0;
    const auto ux = static_cast<std::size_t>(x);
    if (ux < survival_.size()) return survival_[ux];
    if (complete_) return 0.0;
    throw std::out_of_range("DiscretePmf: survival requested past the stored prefix");
  }

 private:
  DiscretePmf(std::vector<double> pmf, bool complete) : pmf_(std::move(pmf)), complete_(complete) {
    for (double v : pmf_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError("DiscretePmf: probabilities must be finite and nonnegative");
      }
    }
  }

  std::vector<double> pmf_;
  std::vector<double> survival_;
  std::optional<double> mean_;
  double residual_ = 0.0;
  bool complete_ = false;
};

inline void check_negbin_args(double k, double p, const char* who) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(std::string(who) + ": p must lie in (0,1)");
  if (!(k >= 1.0)) throw DomainError(std::string(who) + ": k must be >= 1");
}

/// nb(k,p)(x) = C(k+x-1, x) p^k (1-p)^x, evaluated in log space.
inline double nb_pmf(double k, double p, std::size_t x) {
  check_negbin_args(k, p, "nb_pmf");
  return std::exp(log_negbin_pmf(k, p, static_cast<double>(x)));
}

/// NB(k,p)(x) = 1 - sum_{i<k} nb(x+1, 1-p)(i).
inline double nb_cdf(std::size_t k, double p, std::size_t x) {
  check_negbin_args(static_cast<double>(k), p, "nb_cdf");
  const double r = static_cast<double>(x) + 1.0;
  const double s = 1.0 - p;
  // nb(r, s)(i+1) / nb(r, s)(i) = (r+i)/(i+1) * p
  CompensatedSum acc;
  double term = std::exp(r * std::log(s));
  for (std::size_t i = 0; i < k; ++i) {
    acc += term;
    term *= (r + static_cast<double>(i)) / (static_cast<double>(i) + 1.0) * p;
  }
  return static_cast<double>(1.0L - acc.value());
}

inline DiscretePmf geometric_pmf(double p, double tail_tol = kDefaultTailTol) {
  check_negbin_args(1.0, p, "geometric_pmf");
  std::vector<double> f;
  double v = p;
  double tail = 1.0;
  while (tail >= tail_tol) {
    f.push_back(v);
    tail -= v;
    v *= 1.0 - p;
    tail = std::min(tail, v / p);  // exact tail (1-p)^{x+1}
  }
  return DiscretePmf::complete(std::move(f), (1.0 - p) / p, std::max(2 * tail_tol, 1e-14));
}

inline DiscretePmf point_mass(std::size_t at) {
  std::vector<double> f(at + 1, 0.0);
  f[at] = 1.0;
  return DiscretePmf::complete(std::move(f), static_cast<double>(at));
}

/// Negative binomial mixture NBM(pi, p): weights q_1, q_2, ... (stored
/// zero-based, weights[0] is q_1) over NegBin(k, p) components.
struct NbmSpec {
  std::vector<double> weights;
  double p = 0.5;
  /// Mass of the weight sequence cut off past weights.size().
  double residual = 0.0;

  std::size_t k_max() const { return weights.size(); }
  double q(std::size_t k) const { return (k >= 1 && k <= weights.size()) ? weights[k - 1] : 0.0; }

  void validate(double tol = kDefaultTailTol) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("NbmSpec: p must lie in (0,1)");
    if (weights.empty()) throw DomainError("NbmSpec: weight sequence is empty");
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("NbmSpec: weights must be nonnegative");
    }
    const long double total = compensated_total(weights) + residual;
    if (std::fabs(static_cast<double>(total - 1.0L)) > tol) {
      throw DomainError("NbmSpec: weights sum to " + std::to_string(static_cast<double>(total)) +
                        ", not 1");
    }
  }

  /// E(N) = sum k q_k.
  double mean_count() const {
    CompensatedSum s;
    for (std::size_t i = 0; i < weights.size(); ++i) s += static_cast<long double>(i + 1) * weights[i];
    return static_cast<double>(s.value());
  }

  /// Mean of the mixture, E(N)(1-p)/p.
  double mean() const { return mean_count() * (1.0 - p) / p; }
};

inline double nbm_pmf(const NbmSpec& spec, std::size_t x) {
  spec.validate();
  CompensatedSum s;
  for (std::size_t k = 1; k <= spec.k_max(); ++k) {
    const double q = spec.q(k);
    if (q > 0.0) s += q * nb_pmf(static_cast<double>(k), spec.p, x);
  }
  return static_cast<double>(s.value());
}

/// f(0..x_max) of NBM(pi, p); for each component the NegBin terms follow
/// the ratio recurrence in x, seeded in log space.
inline std::vector<double> nbm_pmf_values(const NbmSpec& spec, std::size_t x_max) {
  spec.validate();
  std::vector<CompensatedSum> acc(x_max + 1);
  const double s = 1.0 - spec.p;
  for (std::size_t k = 1; k <= spec.k_max(); ++k) {
    const double q = spec.q(k);
    if (q == 0.0) continue;
    const double kd = static_cast<double>(k);
    double log_v = kd * std::log(spec.p);
    for (std::size_t x = 0; x <= x_max; ++x) {
      if (log_v > -745.0) acc[x] += q * std::exp(log_v);
      log_v += std::log((kd + static_cast<double>(x)) / (static_cast<double>(x) + 1.0) * s);
    }
  }
  std::vector<double> out(x_max + 1);
  for (std::size_t x = 0; x <= x_max; ++x) out[x] = static_cast<double>(acc[x].value());
  return out;
}

/// NBM pmf as a complete DiscretePmf, truncated once the remaining mass is
/// below `tail_tol`.
inline DiscretePmf nbm_to_pmf(const NbmSpec& spec, double tail_tol = kDefaultTailTol,
                              std::size_t cap = 1u << 22) {
  spec.validate();
  const double mean = spec.mean();
  std::size_t x_max = std::max<std::size_t>(16, static_cast<std::size_t>(4.0 * mean) + 16);
  for (;;) {
    auto f = nbm_pmf_values(spec, x_max);
    const double tail = static_cast<double>(1.0L - compensated_total(f)) - spec.residual;
    if (tail < tail_tol) {
      while (f.size() > 1 && f.back() == 0.0) f.pop_back();
      return DiscretePmf::complete(std::move(f), mean, 2 * tail_tol + spec.residual);
    }
    if (x_max >= cap) throw BudgetError("nbm_to_pmf: tail mass above tolerance at support cap");
    x_max *= 2;
  }
}

/// Equilibrium (integrated-tail) pmf f_e(y) = survival(y) / mean.
inline DiscretePmf equilibrium(const DiscretePmf& dist) {
  const double mu = dist.mean();
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw DomainError("equilibrium: mean must be finite and nonzero");
  }
  std::vector<double> fe(dist.size());
  for (std::size_t y = 0; y < fe.size(); ++y) fe[y] = dist.survival(static_cast<long long>(y)) / mu;
  if (dist.is_complete()) {
    while (fe.size() > 1 && fe.back() == 0.0) fe.pop_back();
    return DiscretePmf::complete(std::move(fe), std::nullopt, 1e-10);
  }
  return DiscretePmf::prefix(std::move(fe), std::nullopt);
}

/// Equilibrium of NBM(pi, p) is NBM(pi_e, p), f_Ne(j) = P(N > j-1) / E(N), j >= 1.
inline NbmSpec nbm_equilibrium(const NbmSpec& spec) {
  spec.validate();
  const double en = spec.mean_count();
  if (!std::isfinite(en)) throw DomainError("nbm_equilibrium: E(N) is not finite");
  NbmSpec out;
  out.p = spec.p;
  out.weights.resize(spec.k_max());
  // P(N > j-1) = q_j + q_{j+1} + ... + residual
  CompensatedSum tail;
  tail += spec.residual;
  for (std::size_t j = spec.k_max(); j >= 1; --j) {
    tail += spec.q(j);
    out.weights[j - 1] = static_cast<double>(tail.value()) / en;
  }
  out.residual = std::max(0.0, static_cast<double>(1.0L - compensated_total(out.weights)));
  if (out.residual < 1e-15) out.residual = 0.0;
  return out;
}

}  // namespace druin
