#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "druin/errors.hpp"

namespace druin {

// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  CompensatedSum& operator+=(long double x) {
    const long double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }
  CompensatedSum& operator-=(long double x) { return *this += -x; }
  long double value() const { return sum_ + comp_; }

 private:
  long double sum_ = 0.0L;
  long double comp_ = 0.0L;
};

inline long double compensated_total(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s += x;
  return s.value();
}

// log of the NegBin(r, p) pmf at k failures: C(r+k-1, k) p^r (1-p)^k.
inline double log_negbin_pmf(double r, double p, double k) {
  if (k == 0.0) return r * std::log(p);
  return std::lgamma(r + k) - std::lgamma(r) - std::lgamma(k + 1.0) +
         r * std::log(p) + k * std::log1p(-p);
}

// A contiguous block of pmf values starting at index `first`.
struct PmfWindow {
  std::size_t first = 0;
  std::vector<double> values;

  std::size_t last() const { return first + values.size() - 1; }
  double at(std::size_t k) const {
    if (k < first || k > last()) return 0.0;
    return values[k - first];
  }
};

/// NegBin(r, p) pmf over every index whose omission could matter: the window
/// is grown from the mode in both directions with the ratio recurrence
/// nb(k+1)/nb(k) = (r+k)/(k+1) (1-p) until the geometric bound on the
/// remaining tail on each side is below `tail_tol`.
inline PmfWindow negbin_window(double r, double p, double tail_tol,
                               std::size_t cap = std::size_t{1} << 28) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("negbin_window: p must lie in (0,1)");
  if (!(r > 0.0)) throw DomainError("negbin_window: r must be positive");
  const double q = 1.0 - p;
  const double mode_real = r > 1.0 ? std::floor((r - 1.0) * q / p) : 0.0;
  if (mode_real > static_cast<double>(cap)) {
    throw BudgetError("negbin_window: mode beyond index cap");
  }
  const auto mode = static_cast<std::size_t>(mode_real);
  const double at_mode = std::exp(log_negbin_pmf(r, p, static_cast<double>(mode)));

  std::vector<double> down;  // mode-1, mode-2, ...
  {
    double v = at_mode;
    std::size_t k = mode;
    while (k > 0) {
      // nb(k-1) = nb(k) * k / ((r+k-1) q)
      const double ratio = static_cast<double>(k) / ((r + static_cast<double>(k) - 1.0) * q);
      v *= ratio;
      --k;
      down.push_back(v);
      // ratios keep shrinking as k decreases, so the rest is geometric-bounded
      const double next_ratio =
          k > 0 ? static_cast<double>(k) / ((r + static_cast<double>(k) - 1.0) * q) : 0.0;
      if (next_ratio < 1.0 && v * next_ratio / (1.0 - next_ratio) < tail_tol) break;
    }
  }
  std::vector<double> up;  // mode, mode+1, ...
  {
    double v = at_mode;
    std::size_t k = mode;
    up.push_back(v);
    for (;;) {
      const double ratio = (r + static_cast<double>(k)) / (static_cast<double>(k) + 1.0) * q;
      if (ratio < 1.0 && v * ratio / (1.0 - ratio) < tail_tol) break;
      v *= ratio;
      ++k;
      if (k > cap) throw BudgetError("negbin_window: upper tail exceeds index cap");
      up.push_back(v);
    }
  }
  PmfWindow w;
  w.first = mode - down.size();
  w.values.reserve(down.size() + up.size());
  w.values.assign(down.rbegin(), down.rend());
  w.values.insert(w.values.end(), up.begin(), up.end());
  return w;
}

inline double poisson_pmf(double lambda, std::size_t x) {
  if (lambda == 0.0) return x == 0 ? 1.0 : 0.0;
  const double xd = static_cast<double>(x);
  return std::exp(xd * std::log(lambda) - lambda - std::lgamma(xd + 1.0));
}

}  // namespace druin
