#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "druin/distributions.hpp"
#include "druin/errors.hpp"
#include "druin/exact_ruin.hpp"
#include "druin/numeric.hpp"

namespace druin {

/// Smallest k_cut with mu^{k_cut+1} / (1 - mu) < tail_tol.
inline std::size_t pk_cutoff(double mu, double tail_tol) {
  if (mu <= 0.0) return 0;
  std::size_t k = 0;
  double term = mu;  // mu^{k+1}
  while (term / (1.0 - mu) >= tail_tol) {
    term *= mu;
    ++k;
  }
  return k;
}

/// Cdfs of the convolution powers F_e^{*k} on 0..length-1, k = 1..k_cut.
/// A cdf at x only depends on the base pmf at 0..x, so a prefix is exact.
class ConvolutionTable {
 public:
  ConvolutionTable(std::vector<double> base, std::size_t length, std::size_t k_cut)
      : base_(std::move(base)), length_(length), k_cut_(k_cut) {
    base_.resize(length_, 0.0);
    std::vector<double> power = base_;
    cdfs_.reserve(k_cut_);
    for (std::size_t k = 1; k <= k_cut_; ++k) {
      if (k > 1) power = convolve(power);
      std::vector<double> cdf(length_);
      CompensatedSum c;
      for (std::size_t x = 0; x < length_; ++x) {
        c += power[x];
        cdf[x] = std::min(1.0, static_cast<double>(c.value()));
      }
      cdfs_.push_back(std::move(cdf));
    }
  }

  std::size_t k_cut() const { return k_cut_; }
  std::size_t length() const { return length_; }
  const std::vector<double>& base() const { return base_; }

  /// F_e^{*k}(x) for 1 <= k <= k_cut and x < length.
  double cdf(std::size_t k, std::size_t x) const { return cdfs_.at(k - 1).at(x); }

 private:
  std::vector<double> convolve(const std::vector<double>& a) const {
    std::vector<double> out(length_);
    for (std::size_t x = 0; x < length_; ++x) {
      CompensatedSum s;
      for (std::size_t i = 0; i <= x; ++i) s += a[i] * base_[x - i];
      out[x] = static_cast<double>(s.value());
    }
    return out;
  }

  std::vector<double> base_;
  std::size_t length_;
  std::size_t k_cut_;
  std::vector<std::vector<double>> cdfs_;
};

/// psi(0..u_max) by the discrete Pollaczeck-Khinchine sum
/// (1 - mu) sum_{k>=1} P(S_k* >= u) mu^k, S_k* a sum of k equilibrium draws.
inline std::vector<double> psi_pk_values(const DiscretePmf& claims, std::size_t u_max,
                                         double tail_tol = 1e-10) {
  const double mu = claims.mean();
  require_net_profit(mu, "psi_pk");
  std::vector<double> psi(u_max + 1, 0.0);
  psi[0] = mu;
  if (u_max == 0 || mu == 0.0) return psi;
  const std::size_t k_cut = pk_cutoff(mu, tail_tol);
  std::vector<double> fe(u_max);
  for (std::size_t y = 0; y < u_max; ++y) fe[y] = claims.survival(static_cast<long long>(y)) / mu;
  const ConvolutionTable table(std::move(fe), u_max, k_cut);
  for (std::size_t u = 1; u <= u_max; ++u) {
    CompensatedSum s;
    double weight = mu;  // mu^k
    for (std::size_t k = 1; k <= k_cut; ++k) {
      s += (1.0 - table.cdf(k, u - 1)) * weight;
      weight *= mu;
    }
    psi[u] = static_cast<double>((1.0L - mu) * s.value());
  }
  return psi;
}

inline double psi_pk(const DiscretePmf& claims, std::size_t u, double tail_tol = 1e-10) {
  return psi_pk_values(claims, u, tail_tol)[u];
}

/// phi(0, w) = P(ruin, severity <= w | U(0) = 0) = sum_{x=0}^{w} Fbar(x).
inline double severity_at_zero(const DiscretePmf& claims, std::size_t w) {
  require_net_profit(claims.mean(), "severity_at_zero");
  CompensatedSum s;
  for (std::size_t x = 0; x <= w; ++x) s += claims.survival(static_cast<long long>(x));
  return static_cast<double>(s.value());
}

}  // namespace druin
