#pragma once

// Reference computations used only by the tests. They follow the textbook
// definitions directly (brute-force sums, exact combinatorics, first-step
// conditioning) and share no code path with the library numerics.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

inline double binom(double n, double k) {
  double r = 1.0;
  for (double i = 1.0; i <= k; i += 1.0) r *= (n - k + i) / i;
  return r;
}

/// C(k+x-1, x) p^k (1-p)^x by the product formula.
inline double negbin(int k, double p, int x) {
  return binom(k + x - 1, x) * std::pow(p, k) * std::pow(1.0 - p, x);
}

inline double poisson(double lambda, int x) {
  double v = std::exp(-lambda);
  for (int i = 1; i <= x; ++i) v *= lambda / i;
  return v;
}

/// Direct convolution of two pmfs truncated to `len` entries.
inline std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b,
                                    std::size_t len) {
  std::vector<double> out(len, 0.0);
  for (std::size_t i = 0; i < a.size() && i < len; ++i)
    for (std::size_t j = 0; j < b.size() && i + j < len; ++j) out[i + j] += a[i] * b[j];
  return out;
}

/// Finite-horizon ruin probability by dynamic programming over the surplus:
/// P(U(t) <= 0 for some 1 <= t <= horizon | U(0) = u). Increases to psi(u)
/// as the horizon grows, independently of any ruin recursion.
inline double finite_horizon_ruin(const std::vector<double>& f, int u, int horizon) {
  // surplus values 1..cap tracked; mass above cap is negligible for the tests
  const int cap = u + horizon + 2;
  std::vector<double> alive(cap + 1, 0.0), next(cap + 1, 0.0);
  alive[u] = 1.0;
  double ruined = 0.0;
  bool first = true;
  for (int t = 1; t <= horizon; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s <= cap; ++s) {
      if (alive[s] == 0.0) continue;
      if (s == 0 && !first) continue;
      for (std::size_t y = 0; y < f.size(); ++y) {
        const int ns = s + 1 - static_cast<int>(y);
        if (ns <= 0) {
          ruined += alive[s] * f[y];
        } else if (ns <= cap) {
          next[ns] += alive[s] * f[y];
        }
      }
    }
    first = false;
    alive.swap(next);
  }
  return ruined;
}

/// Cbar_{k,n} for exponential(beta) mixing on the 1/n grid: the grid values
/// Fbar(j/n) = e^{-beta j/n} are geometric, so N_e and N* are geometric too and
/// Cbar_{k,n} = (1/beta) ((1 - e^{-beta/n}) / beta + e^{-beta/n})^k.
inline double exp_mixing_cbar(double beta, std::size_t n, std::size_t k) {
  const double e = std::exp(-beta / static_cast<double>(n));
  return (1.0 / beta) * std::pow((1.0 / beta) * (1.0 - e) + e, static_cast<double>(k));
}

/// Simpson rule on [a, b] with `n` (even) panels.
inline double simpson(const std::function<double(double)>& g, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = g(a) + g(b);
  for (int i = 1; i < n; ++i) s += g(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracle
