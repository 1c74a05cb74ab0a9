#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "druin/distributions.hpp"
#include "druin/errors.hpp"
#include "druin/numeric.hpp"

namespace druin {

namespace mixing {

struct Exponential {
  double beta;
};
struct Erlang {
  std::size_t k;
  double beta;
};
/// Erlang mixture sum_k q_k Erl(k, beta); weights[0] is q_1.
struct ErlangMixture {
  std::vector<double> weights;
  double beta;
};
/// Lomax form: survival (theta / (theta + x))^alpha, mean theta / (alpha - 1).
struct Pareto {
  double alpha;
  double theta;
};
/// log(Lambda) ~ Normal(m, s^2).
struct Lognormal {
  double m;
  double s;
};
struct Degenerate {
  double lambda0;
};
/// Piecewise-linear cdf through (lambda_i, cdf_i); cdf jumps from 0 to
/// cdf_0 at lambda_0 and equals 1 from the last point on.
struct Tabulated {
  std::vector<double> lambda;
  std::vector<double> cdf;
};

}  // namespace mixing

/// Mixing law F_Lambda of a mixed Poisson distribution.
class MixingDistribution {
 public:
  using Kind = std::variant<mixing::Exponential, mixing::Erlang, mixing::ErlangMixture,
                            mixing::Pareto, mixing::Lognormal, mixing::Degenerate,
                            mixing::Tabulated>;

  static MixingDistribution exponential(double beta) {
    if (!(beta > 0.0)) throw DomainError("exponential mixing: beta must be positive");
    return MixingDistribution(mixing::Exponential{beta});
  }
  static MixingDistribution erlang(std::size_t k, double beta) {
    if (k < 1 || !(beta > 0.0)) throw DomainError("erlang mixing: need k >= 1 and beta > 0");
    return MixingDistribution(mixing::Erlang{k, beta});
  }
  static MixingDistribution erlang_mixture(std::vector<double> weights, double beta) {
    if (!(beta > 0.0)) throw DomainError("erlang mixture: beta must be positive");
    NbmSpec{weights, 0.5, 0.0}.validate();
    return MixingDistribution(mixing::ErlangMixture{std::move(weights), beta});
  }
  static MixingDistribution pareto(double alpha, double theta) {
    if (!(alpha > 1.0) || !(theta > 0.0)) {
      throw DomainError("pareto mixing: need alpha > 1 (finite mean) and theta > 0");
    }
    return MixingDistribution(mixing::Pareto{alpha, theta});
  }
  static MixingDistribution lognormal(double m, double s) {
    if (!(s > 0.0)) throw DomainError("lognormal mixing: s must be positive");
    return MixingDistribution(mixing::Lognormal{m, s});
  }
  static MixingDistribution degenerate(double lambda0) {
    if (!(lambda0 >= 0.0)) throw DomainError("degenerate mixing: lambda0 must be >= 0");
    return MixingDistribution(mixing::Degenerate{lambda0});
  }
  static MixingDistribution tabulated(std::vector<double> lambda, std::vector<double> cdf) {
    if (lambda.empty() || lambda.size() != cdf.size()) {
      throw DomainError("tabulated mixing: need equally sized, nonempty columns");
    }
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      if (!(lambda[i] >= 0.0) || !(cdf[i] >= 0.0 && cdf[i] <= 1.0)) {
        throw DomainError("tabulated mixing: need lambda >= 0 and cdf in [0,1]");
      }
      if (i > 0 && !(lambda[i] >= lambda[i - 1])) {
        throw DomainError("tabulated mixing: lambda must be nondecreasing");
      }
      if (i > 0 && cdf[i] < cdf[i - 1]) throw DomainError("tabulated mixing: cdf must be nondecreasing");
    }
    if (std::fabs(cdf.back() - 1.0) > 1e-12) {
      throw DomainError("tabulated mixing: cdf must reach 1 at the last point");
    }
    cdf.back() = 1.0;
    return MixingDistribution(mixing::Tabulated{std::move(lambda), std::move(cdf)});
  }

  /// Reads a two-column "lambda,cdf" CSV (header line required).
  static MixingDistribution from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("tabulated mixing: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DomainError("tabulated mixing: empty file " + path);
    std::vector<double> lam, cdf;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      std::istringstream ss(line);
      std::string a, b;
      if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
        throw DomainError("tabulated mixing: malformed line " + std::to_string(line_no));
      }
      try {
        lam.push_back(std::stod(a));
        cdf.push_back(std::stod(b));
      } catch (const std::exception&) {
        throw DomainError("tabulated mixing: non-numeric value on line " + std::to_string(line_no));
      }
    }
    return tabulated(std::move(lam), std::move(cdf));
  }

  const Kind& kind() const { return kind_; }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(kind_);
  }

  std::string describe() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          std::ostringstream os;
          os.precision(17);
          if constexpr (std::is_same_v<T, mixing::Exponential>) {
            os << "exponential(" << k.beta << ")";
          } else if constexpr (std::is_same_v<T, mixing::Erlang>) {
            os << "erlang(" << k.k << "," << k.beta << ")";
          } else if constexpr (std::is_same_v<T, mixing::ErlangMixture>) {
            os << "erlang_mixture(" << k.weights.size() << " weights," << k.beta << ")";
          } else if constexpr (std::is_same_v<T, mixing::Pareto>) {
            os << "pareto(" << k.alpha << "," << k.theta << ")";
          } else if constexpr (std::is_same_v<T, mixing::Lognormal>) {
            os << "lognormal(" << k.m << "," << k.s << ")";
          } else if constexpr (std::is_same_v<T, mixing::Degenerate>) {
            os << "degenerate(" << k.lambda0 << ")";
          } else {
            os << "tabulated(" << k.lambda.size() << " points)";
          }
          return os.str();
        },
        kind_);
  }

  double mean() const {
    return std::visit(
        [](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, mixing::Exponential>) {
            return 1.0 / k.beta;
          } else if constexpr (std::is_same_v<T, mixing::Erlang>) {
            return static_cast<double>(k.k) / k.beta;
          } else if constexpr (std::is_same_v<T, mixing::ErlangMixture>) {
            CompensatedSum s;
            for (std::size_t i = 0; i < k.weights.size(); ++i) {
              s += static_cast<long double>(i + 1) * k.weights[i];
            }
            return static_cast<double>(s.value()) / k.beta;
          } else if constexpr (std::is_same_v<T, mixing::Pareto>) {
            return k.theta / (k.alpha - 1.0);
          } else if constexpr (std::is_same_v<T, mixing::Lognormal>) {
            return std::exp(k.m + 0.5 * k.s * k.s);
          } else if constexpr (std::is_same_v<T, mixing::Degenerate>) {
            return k.lambda0;
          } else {
            CompensatedSum s;
            s += k.cdf[0] * k.lambda[0];
            for (std::size_t i = 1; i < k.lambda.size(); ++i) {
              s += (k.cdf[i] - k.cdf[i - 1]) * 0.5 * (k.lambda[i] + k.lambda[i - 1]);
            }
            return static_cast<double>(s.value());
          }
        },
        kind_);
  }

  /// P(Lambda > x). Computed directly (not as 1 - cdf) for tail accuracy.
  double survival(double x) const {
    if (x < 0.0) return 1.0;
    return std::visit(
        [x](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, mixing::Exponential>) {
            return std::exp(-k.beta * x);
          } else if constexpr (std::is_same_v<T, mixing::Erlang>) {
            return erlang_survival(k.k, k.beta, x);
          } else if constexpr (std::is_same_v<T, mixing::ErlangMixture>) {
            return erlang_mixture_survival(k.weights, k.beta, x);
          } else if constexpr (std::is_same_v<T, mixing::Pareto>) {
            return std::pow(k.theta / (k.theta + x), k.alpha);
          } else if constexpr (std::is_same_v<T, mixing::Lognormal>) {
            if (x == 0.0) return 1.0;
            return 0.5 * std::erfc((std::log(x) - k.m) / (k.s * std::sqrt(2.0)));
          } else if constexpr (std::is_same_v<T, mixing::Degenerate>) {
            return x < k.lambda0 ? 1.0 : 0.0;
          } else {
            return 1.0 - tabulated_cdf(k, x);
          }
        },
        kind_);
  }

  double cdf(double x) const {
    if (x < 0.0) return 0.0;
    if (const auto* t = std::get_if<mixing::Tabulated>(&kind_)) return tabulated_cdf(*t, x);
    return 1.0 - survival(x);
  }

  static double erlang_survival(std::size_t k, double beta, double x) {
    // P(Poisson(beta x) < k)
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(static_cast<double>(k), beta * x);
  }

  static double erlang_mixture_survival(const std::vector<double>& w, double beta, double x) {
    if (x <= 0.0) return 1.0;
    CompensatedSum s;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] > 0.0) s += w[i] * erlang_survival(i + 1, beta, x);
    }
    return static_cast<double>(s.value());
  }

  static double tabulated_cdf(const mixing::Tabulated& t, double x) {
    if (x < t.lambda.front()) return 0.0;
    if (x >= t.lambda.back()) return 1.0;
    const auto it = std::upper_bound(t.lambda.begin(), t.lambda.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - t.lambda.begin());  // lambda[i-1] <= x < lambda[i]
    const double a = t.lambda[i - 1], b = t.lambda[i];
    return t.cdf[i - 1] + (t.cdf[i] - t.cdf[i - 1]) * (x - a) / (b - a);
  }

  /// Density of the continuous heavy-tailed kinds (Pareto, lognormal).
  double density(double x) const {
    if (const auto* p = std::get_if<mixing::Pareto>(&kind_)) {
      if (x < 0.0) return 0.0;
      return p->alpha / p->theta * std::pow(p->theta / (p->theta + x), p->alpha + 1.0);
    }
    if (const auto* l = std::get_if<mixing::Lognormal>(&kind_)) {
      if (!(x > 0.0) || !std::isfinite(x)) return 0.0;
      const double z = (std::log(x) - l->m) / l->s;
      return std::exp(-0.5 * z * z) / (x * l->s * std::sqrt(2.0 * M_PI));
    }
    throw DomainError("density: only provided for pareto and lognormal mixing");
  }

  /// Inverse cdf for the continuous heavy-tailed kinds.
  double quantile(double v) const {
    if (const auto* p = std::get_if<mixing::Pareto>(&kind_)) {
      return p->theta * (std::pow(1.0 - v, -1.0 / p->alpha) - 1.0);
    }
    if (const auto* l = std::get_if<mixing::Lognormal>(&kind_)) {
      if (v <= 0.0) return 0.0;
      const double z = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * v);
      return std::exp(l->m + l->s * z);
    }
    throw DomainError("quantile: only provided for pareto and lognormal mixing");
  }

 private:
  explicit MixingDistribution(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// MP(ErlangM(pi, beta)) is NBM(pi, beta / (beta + 1)).
inline NbmSpec erlangm_to_nbm(std::vector<double> weights, double beta) {
  if (!(beta > 0.0)) throw DomainError("erlangm_to_nbm: beta must be positive");
  NbmSpec s{std::move(weights), beta / (beta + 1.0), 0.0};
  s.validate();
  return s;
}

/// The NBM form of an Erlang-type (or exponential) mixing law, if it has one.
inline std::optional<NbmSpec> mixing_as_nbm(const MixingDistribution& mix) {
  if (const auto* e = std::get_if<mixing::Exponential>(&mix.kind())) {
    return erlangm_to_nbm({1.0}, e->beta);
  }
  if (const auto* e = std::get_if<mixing::Erlang>(&mix.kind())) {
    std::vector<double> w(e->k, 0.0);
    w.back() = 1.0;
    return erlangm_to_nbm(std::move(w), e->beta);
  }
  if (const auto* e = std::get_if<mixing::ErlangMixture>(&mix.kind())) {
    return erlangm_to_nbm(e->weights, e->beta);
  }
  return std::nullopt;
}

struct QuadratureOptions {
  double abs_tol = 1e-10;
  unsigned max_depth = 8;
};

/// P(X = x) for X ~ MP(F_Lambda).
inline double mp_pmf(const MixingDistribution& mix, std::size_t x, QuadratureOptions opt = {}) {
  if (auto nbm = mixing_as_nbm(mix)) return nbm_pmf(*nbm, x);
  if (const auto* d = std::get_if<mixing::Degenerate>(&mix.kind())) return poisson_pmf(d->lambda0, x);
  if (const auto* t = std::get_if<mixing::Tabulated>(&mix.kind())) {
    // atom at lambda_0 (and at repeated lambdas) plus uniform density on each segment:
    // int_a^b poisson(l)(x) dl = P(x+1, b) - P(x+1, a)
    const double a1 = static_cast<double>(x) + 1.0;
    CompensatedSum s;
    s += t->cdf[0] * poisson_pmf(t->lambda[0], x);
    for (std::size_t i = 1; i < t->lambda.size(); ++i) {
      const double mass = t->cdf[i] - t->cdf[i - 1];
      if (mass == 0.0) continue;
      const double a = t->lambda[i - 1], b = t->lambda[i];
      if (a == b) {
        s += mass * poisson_pmf(a, x);
        continue;
      }
      const double lo = a > 0.0 ? boost::math::gamma_p(a1, a) : 0.0;
      const double hi = boost::math::gamma_p(a1, b);
      s += mass / (b - a) * (hi - lo);
    }
    return static_cast<double>(s.value());
  }
  // Pareto, lognormal: int_0^inf f_Lambda(l) poisson(l)(x) dl, split at
  // quantiles of Lambda and around the Poisson kernel peak l = x
  auto integrand = [&](double l) {
    const double d = mix.density(l);
    return d == 0.0 ? 0.0 : d * poisson_pmf(l, x);
  };
  const double xd = static_cast<double>(x);
  const double width = 8.0 * std::sqrt(xd + 1.0);
  std::vector<double> cuts = {0.0, mix.mean(), xd - width, xd, xd + width};
  for (double v : {1e-12, 1e-8, 1e-4, 1e-2, 0.25, 0.5, 0.75, 0.99, 1 - 1e-4}) cuts.push_back(mix.quantile(v));
  std::erase_if(cuts, [](double c) { return c < 0.0; });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(std::numeric_limits<double>::infinity());
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  constexpr double kRelTol = 1e-13;
  const std::size_t pieces = cuts.size() - 1;
  std::vector<double> values(pieces), errors(pieces);
  double total = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    values[i] = Rule::integrate(integrand, cuts[i], cuts[i + 1], 0, kRelTol, &errors[i]);
    total += values[i];
  }
  // refine only pieces whose error matters relative to the whole integral
  double value = 0.0, error = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    if (errors[i] > kRelTol * std::fabs(total)) {
      values[i] = Rule::integrate(integrand, cuts[i], cuts[i + 1], opt.max_depth, kRelTol, &errors[i]);
    }
    value += values[i];
    error += errors[i];
  }
  if (!(error <= opt.abs_tol) || !std::isfinite(value)) {
    throw QuadratureError("mp_pmf: quadrature error estimate " + std::to_string(error) +
                          " above tolerance for " + mix.describe() + " at x=" + std::to_string(x));
  }
  return value;
}

namespace detail {

inline void extend_mp_values(const MixingDistribution& mix, std::vector<double>& f, std::size_t x_max) {
  if (f.size() > x_max) return;
  if (auto nbm = mixing_as_nbm(mix)) {
    f = nbm_pmf_values(*nbm, x_max);
    return;
  }
  for (std::size_t x = f.size(); x <= x_max; ++x) f.push_back(mp_pmf(mix, x));
}

inline DiscretePmf finish_mp_claims(const MixingDistribution& mix, std::vector<double> f, double tail_tol) {
  const double tail = static_cast<double>(1.0L - compensated_total(f));
  if (std::fabs(tail) < tail_tol) {
    while (f.size() > 1 && f.back() == 0.0) f.pop_back();
    return DiscretePmf::complete(std::move(f), mix.mean(), 2 * tail_tol);
  }
  return DiscretePmf::prefix(std::move(f), mix.mean());
}

}  // namespace detail

/// MP claims as a DiscretePmf on 0..x_max with the exact mean E(Lambda).
/// Marked complete when the stored values carry all but `tail_tol` mass.
inline DiscretePmf mp_claims(const MixingDistribution& mix, std::size_t x_max,
                             double tail_tol = kDefaultTailTol) {
  std::vector<double> f;
  detail::extend_mp_values(mix, f, x_max);
  return detail::finish_mp_claims(mix, std::move(f), tail_tol);
}

/// Smallest support that makes mp_claims complete, doubling up to `cap`.
inline DiscretePmf mp_claims_complete(const MixingDistribution& mix, double tail_tol = kDefaultTailTol,
                                      std::size_t cap = 1u << 16) {
  std::size_t x_max = std::max<std::size_t>(32, static_cast<std::size_t>(8 * mix.mean()) + 32);
  std::vector<double> f;
  for (;;) {
    detail::extend_mp_values(mix, f, x_max);
    if (std::fabs(static_cast<double>(1.0L - compensated_total(f))) < tail_tol) {
      return detail::finish_mp_claims(mix, std::move(f), tail_tol);
    }
    if (x_max >= cap) {
      throw BudgetError("mp_claims_complete: tail mass still above tolerance at support " +
                        std::to_string(x_max) + " for " + mix.describe());
    }
    x_max = std::min(cap, x_max * 2);
  }
}

/// Grid discretization of F_Lambda: q(k,n) = F(k/n) - F((k-1)/n), p_n = n/(n+1).
struct DiscretizationSpec {
  std::size_t n = 1;
  double p_n = 0.5;
  std::vector<double> weights;  // weights[k-1] = q(k, n), k = 1..K_max
  double residual = 0.0;        // survival(K_max / n)

  NbmSpec to_nbm() const { return NbmSpec{weights, p_n, residual}; }
};

inline DiscretizationSpec discretize_mixing(const MixingDistribution& mix, std::size_t n,
                                            double mass_tol = kDefaultTailTol,
                                            std::size_t k_cap = std::size_t{1} << 26) {
  if (n < 1) throw DomainError("discretize_mixing: n must be >= 1");
  DiscretizationSpec d;
  d.n = n;
  d.p_n = static_cast<double>(n) / (static_cast<double>(n) + 1.0);
  const double nd = static_cast<double>(n);
  double prev = mix.survival(0.0);
  // mass at Lambda = 0 cannot be represented by k >= 1 components
  for (std::size_t k = 1;; ++k) {
    if (k > k_cap) {
      throw BudgetError("discretize_mixing: more than " + std::to_string(k_cap) +
                        " grid weights needed for " + mix.describe());
    }
    const double cur = mix.survival(static_cast<double>(k) / nd);
    d.weights.push_back(std::max(0.0, prev - cur));
    prev = cur;
    if (cur < mass_tol) {
      d.residual = cur;
      break;
    }
  }
  return d;
}

}  // namespace druin
