#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "druin/distributions.hpp"
#include "druin/errors.hpp"
#include "druin/exact_ruin.hpp"
#include "druin/rng.hpp"

namespace druin {

/// Walker/Vose alias table over a complete pmf.
class AliasSampler {
 public:
  explicit AliasSampler(const DiscretePmf& pmf) {
    if (!pmf.is_complete()) throw DomainError("AliasSampler: needs a complete pmf");
    const auto vals = pmf.values();
    const std::size_t n = vals.size();
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    long double total = 0.0L;
    for (double v : vals) total += v;
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = static_cast<double>(vals[i] * static_cast<long double>(n) / total);
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      small.pop_back();
      const std::size_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::size_t i : large) prob_[i] = 1.0;
    for (std::size_t i : small) prob_[i] = 1.0;
  }

  std::size_t sample(CounterRng& rng) const {
    const double u = rng.uniform() * static_cast<double>(prob_.size());
    const auto i = std::min(static_cast<std::size_t>(u), prob_.size() - 1);
    return (u - static_cast<double>(i)) < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

struct SimConfig {
  std::size_t u = 0;
  std::size_t horizon = 100000;
  std::size_t replications = 10000;
  std::uint64_t seed = 1;
  /// Paths stop once a further record has probability below this.
  double record_tol = 1e-9;
  std::size_t deficit_cap = 4096;
};

/// One simulated path of Z(t) = sum_{i<=t} (Y_i - 1).
struct PathStats {
  bool ruined = false;
  std::size_t tau = 0;         // ruin time when ruined
  long long severity = 0;      // |U(tau)| when ruined
  std::vector<std::size_t> record_times;
  std::vector<long long> record_severities;
  long long max_z = 0;         // max_{t>=0} Z(t), tracked independently of records
  bool censored = false;       // horizon reached before the exit rule fired

  std::size_t record_count() const { return record_times.size(); }
};

/// Early-exit rule: a path stops once it sits `deficit` below its last
/// record. `bias` = psi(deficit) bounds the probability of a missed record.
struct ExitRule {
  std::size_t deficit = std::numeric_limits<std::size_t>::max();
  double bias = 0.0;
};

/// Smallest d >= 1 with psi(d) < tol, else d = cap. No exit when the net
/// profit condition fails.
inline ExitRule exit_rule(const DiscretePmf& claims, double tol, std::size_t cap) {
  if (!(claims.mean() < 1.0)) return {};
  for (std::size_t span = 64;; span *= 2) {
    const std::size_t top = std::min(span, cap);
    const auto psi = psi_recursion(claims, top);
    for (std::size_t d = 1; d <= top; ++d) {
      if (psi[d] < tol) return {d, psi[d]};
    }
    if (top == cap) return {cap, psi[cap]};
  }
}

inline std::size_t exit_deficit(const DiscretePmf& claims, double tol, std::size_t cap) {
  return exit_rule(claims, tol, cap).deficit;
}

inline PathStats simulate_path(const AliasSampler& sampler, std::size_t u, std::size_t horizon,
                               std::size_t deficit, CounterRng& rng) {
  PathStats p;
  const auto target = static_cast<long long>(u);
  const long long exit_gap =
      deficit == std::numeric_limits<std::size_t>::max() ? std::numeric_limits<long long>::max()
                                                         : static_cast<long long>(deficit);
  long long z = 0;
  long long level = 0;  // Z at the last record time (tau_0* = 0)
  std::size_t t = 0;
  for (;;) {
    if (t == horizon) {
      p.censored = true;
      break;
    }
    ++t;
    z += static_cast<long long>(sampler.sample(rng)) - 1;
    p.max_z = std::max(p.max_z, z);
    if (z >= level) {
      p.record_times.push_back(t);
      p.record_severities.push_back(z - level);
      level = z;
    }
    if (!p.ruined && z >= target) {
      p.ruined = true;
      p.tau = t;
      p.severity = z - target;
    }
    // not ruined implies target > level, so the record gap bounds both
    if (level - z >= exit_gap) break;
  }
  return p;
}

/// Order-independent sufficient statistics over many paths.
struct SimSummary {
  std::size_t u = 0;
  std::uint64_t replications = 0;
  std::uint64_t ruined = 0;
  std::uint64_t censored = 0;
  std::uint64_t identity_violations = 0;  // paths with max Z != sum of record severities
  std::uint64_t total_records = 0;
  std::uint64_t with_records = 0;  // paths with K > 0
  std::vector<std::uint64_t> ruin_severity_hist;    // W, ruined paths
  std::vector<std::uint64_t> record_count_hist;     // K, uncensored paths
  std::vector<std::uint64_t> record_severity_hist;  // Y_i*, all records
  std::vector<std::uint64_t> max_hist;              // max Z, all paths
  std::size_t exit_deficit = 0;
  double exit_bias = 0.0;

  static void bump(std::vector<std::uint64_t>& h, std::size_t i, std::uint64_t by = 1) {
    if (h.size() <= i) h.resize(i + 1, 0);
    h[i] += by;
  }

  void add(const PathStats& p) {
    ++replications;
    if (p.ruined) {
      ++ruined;
      bump(ruin_severity_hist, static_cast<std::size_t>(p.severity));
    }
    if (p.censored) {
      ++censored;
    } else {
      bump(record_count_hist, p.record_count());
    }
    long long sum = 0;
    for (long long s : p.record_severities) {
      sum += s;
      bump(record_severity_hist, static_cast<std::size_t>(s));
    }
    total_records += p.record_count();
    if (p.record_count() > 0) ++with_records;
    if (sum != p.max_z) ++identity_violations;
    bump(max_hist, static_cast<std::size_t>(p.max_z));
  }

  void merge(const SimSummary& o) {
    replications += o.replications;
    ruined += o.ruined;
    censored += o.censored;
    identity_violations += o.identity_violations;
    total_records += o.total_records;
    with_records += o.with_records;
    for (std::size_t i = 0; i < o.ruin_severity_hist.size(); ++i) bump(ruin_severity_hist, i, o.ruin_severity_hist[i]);
    for (std::size_t i = 0; i < o.record_count_hist.size(); ++i) bump(record_count_hist, i, o.record_count_hist[i]);
    for (std::size_t i = 0; i < o.record_severity_hist.size(); ++i) bump(record_severity_hist, i, o.record_severity_hist[i]);
    for (std::size_t i = 0; i < o.max_hist.size(); ++i) bump(max_hist, i, o.max_hist[i]);
  }

  double fraction(std::uint64_t count) const {
    return replications == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(replications);
  }
  double binomial_se(double p) const {
    return replications == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(replications));
  }

  /// Ruin frequency at the configured u.
  double psi_hat() const { return fraction(ruined); }
  double std_error() const { return binomial_se(psi_hat()); }

  /// Ruin frequency at any level v from the same paths: max Z >= v for
  /// v >= 1, and at least one record for v = 0.
  double psi_hat_at(std::size_t v) const {
    if (v == 0) return fraction(with_records);
    std::uint64_t hits = 0;
    for (std::size_t i = v; i < max_hist.size(); ++i) hits += max_hist[i];
    return fraction(hits);
  }
  double std_error_at(std::size_t v) const { return binomial_se(psi_hat_at(v)); }

  double censored_fraction() const { return fraction(censored); }
};

inline SimSummary simulate_paths(const DiscretePmf& claims, const SimConfig& cfg) {
  if (cfg.horizon < 1 || cfg.replications < 1) {
    throw DomainError("simulate_paths: horizon and replications must be positive");
  }
  const AliasSampler sampler(claims);
  SimSummary out;
  out.u = cfg.u;
  const ExitRule rule = exit_rule(claims, cfg.record_tol, cfg.deficit_cap);
  out.exit_deficit = rule.deficit;
  out.exit_bias = rule.bias;
  for (std::size_t r = 0; r < cfg.replications; ++r) {
    CounterRng rng(cfg.seed, {static_cast<std::uint64_t>(r)});
    const PathStats p = simulate_path(sampler, cfg.u, cfg.horizon, out.exit_deficit, rng);
    out.add(p);
  }
  return out;
}

struct GofReport {
  double chi2 = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
  std::uint64_t n = 0;
  std::size_t bins = 0;
};

/// Pearson chi-square of `observed` counts against category probabilities
/// `probs` (same length; the last category is the upper tail). Adjacent
/// categories are pooled until each bin expects at least `min_expected`.
inline GofReport chi_square(const std::vector<std::uint64_t>& observed, const std::vector<double>& probs,
                            double min_expected = 5.0) {
  GofReport r;
  for (auto c : observed) r.n += c;
  if (r.n == 0) return r;
  const double n = static_cast<double>(r.n);
  std::vector<std::pair<double, double>> bins;  // (observed, expected)
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    o += i < observed.size() ? static_cast<double>(observed[i]) : 0.0;
    e += probs[i] * n;
    if (e >= min_expected) {
      bins.emplace_back(o, e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (bins.empty()) {
      bins.emplace_back(o, e);
    } else {
      bins.back().first += o;
      bins.back().second += e;
    }
  }
  r.bins = bins.size();
  for (const auto& [ob, ex] : bins) {
    if (ex > 0.0) {
      r.chi2 += (ob - ex) * (ob - ex) / ex;
    } else if (ob > 0.0) {
      r.chi2 = std::numeric_limits<double>::infinity();
    }
  }
  r.df = bins.size() > 0 ? bins.size() - 1 : 0;
  if (r.df == 0) {
    r.p_value = r.chi2 == 0.0 ? 1.0 : 0.0;
  } else if (!std::isfinite(r.chi2)) {
    r.p_value = 0.0;
  } else {
    r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.df), 0.5 * r.chi2);
  }
  return r;
}

/// Empirical record count K against Geometric(1 - mu): f_K(k) = (1 - mu) mu^k.
inline GofReport check_record_count_law(const SimSummary& stats, const DiscretePmf& claims) {
  const double mu = claims.mean();
  const std::size_t len = std::max<std::size_t>(stats.record_count_hist.size(), 1);
  std::vector<double> probs(len);
  double power = 1.0;
  for (std::size_t k = 0; k + 1 < len; ++k) {
    probs[k] = (1.0 - mu) * power;
    power *= mu;
  }
  probs[len - 1] = power;  // P(K >= len-1)
  return chi_square(stats.record_count_hist, probs);
}

struct SeverityReport {
  GofReport record_severity;   // Y_i* against Fbar(x)/mu
  bool ruin_checked = false;   // only for paths started at u = 0
  GofReport ruin_severity;     // W | ruin against Fbar(w)/mu
  double ruin_fraction = 0.0;  // sum_w P(ruin, W = w) estimate
  double ruin_expected = 0.0;  // mu
  double ruin_z = 0.0;
};

inline SeverityReport check_severity_law(const SimSummary& stats, const DiscretePmf& claims) {
  SeverityReport rep;
  const double mu = claims.mean();
  auto equilibrium_probs = [&](std::size_t len) {
    std::vector<double> probs(std::max<std::size_t>(len, 1));
    double below = 0.0;
    for (std::size_t x = 0; x + 1 < probs.size(); ++x) {
      probs[x] = mu > 0.0 ? claims.survival(static_cast<long long>(x)) / mu : 0.0;
      below += probs[x];
    }
    probs.back() = std::max(0.0, 1.0 - below);
    return probs;
  };
  rep.record_severity = chi_square(stats.record_severity_hist, equilibrium_probs(stats.record_severity_hist.size()));
  if (stats.u == 0) {
    rep.ruin_checked = true;
    rep.ruin_severity = chi_square(stats.ruin_severity_hist, equilibrium_probs(stats.ruin_severity_hist.size()));
    rep.ruin_fraction = stats.psi_hat();
    rep.ruin_expected = mu;
    const double se = std::sqrt(mu * (1.0 - mu) / static_cast<double>(std::max<std::uint64_t>(stats.replications, 1)));
    rep.ruin_z = se > 0.0 ? (rep.ruin_fraction - mu) / se : (rep.ruin_fraction == mu ? 0.0 : INFINITY);
  }
  return rep;
}

}  // namespace druin
