#pragma once

#include <array>
#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "druin/distributions.hpp"
#include "druin/errors.hpp"
#include "druin/exact_ruin.hpp"
#include "druin/mixing.hpp"
#include "druin/mp_ruin.hpp"
#include "druin/nbm_ruin.hpp"
#include "druin/pk_eval.hpp"
#include "druin/simulator.hpp"
#include "druin/table.hpp"

namespace druin {

namespace model {

/// Gerber-Dickson claims Y read from a pmf file.
struct GdPmf {
  DiscretePmf claims;
  std::string source;
};

/// Compound binomial: claim with probability p, size from a pmf file.
struct CompoundBinomial {
  CompoundBinomialSpec spec;
  std::string source;
};

struct Nbm {
  NbmSpec spec;
};

struct Mp {
  MixingDistribution mix;
};

}  // namespace model

using Model = std::variant<model::GdPmf, model::CompoundBinomial, model::Nbm, model::Mp>;

enum class Method { exact, pk, nbm, mp1, mp2, simulate };

inline constexpr std::array<Method, 6> kAllMethods = {Method::exact, Method::pk,  Method::nbm,
                                                      Method::mp1,   Method::mp2, Method::simulate};

inline std::string method_name(Method m) {
  switch (m) {
    case Method::exact: return "exact";
    case Method::pk: return "pk";
    case Method::nbm: return "nbm";
    case Method::mp1: return "mp1";
    case Method::mp2: return "mp2";
    case Method::simulate: return "simulate";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : kAllMethods) {
    if (method_name(m) == s) return m;
  }
  throw DomainError("unknown method '" + s + "'");
}

/// Output column holding each method's psi values.
inline std::string method_column(Method m) {
  switch (m) {
    case Method::exact: return "E";
    case Method::pk: return "PK";
    case Method::nbm: return "NBM";
    case Method::mp1: return "N1";
    case Method::mp2: return "N2";
    case Method::simulate: return "SIM";
  }
  return "?";
}

/// Relative error column paired with a method column.
inline std::string error_column(Method m) {
  switch (m) {
    case Method::mp1: return "err1";
    case Method::mp2: return "err2";
    case Method::simulate: return "err_sim";
    case Method::pk: return "err_pk";
    case Method::nbm: return "err_nbm";
    case Method::exact: return "err_e";
  }
  return "?";
}

inline std::string describe(const Model& m) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, model::GdPmf>) {
          return "gd(" + x.source + ")";
        } else if constexpr (std::is_same_v<T, model::CompoundBinomial>) {
          std::ostringstream s;
          s << "cb(p=" << x.spec.p << "," << x.source << ")";
          return s.str();
        } else if constexpr (std::is_same_v<T, model::Nbm>) {
          std::ostringstream s;
          s << "nbm(p=" << x.spec.p << ",weights=";
          for (std::size_t i = 0; i < x.spec.weights.size(); ++i) s << (i ? ";" : "") << x.spec.weights[i];
          s << ")";
          return s.str();
        } else {
          return "mp(" + x.mix.describe() + ")";
        }
      },
      m);
}

/// Mean claim per period of the model.
inline double model_mean(const Model& m) {
  return std::visit(
      [](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, model::GdPmf>) {
          return x.claims.mean();
        } else if constexpr (std::is_same_v<T, model::CompoundBinomial>) {
          return x.spec.p * x.spec.mean_claim_size();
        } else if constexpr (std::is_same_v<T, model::Nbm>) {
          return x.spec.mean();
        } else {
          return x.mix.mean();
        }
      },
      m);
}

/// NBM form of the model when it has one (NBM models, Erlang-type mixing).
inline std::optional<NbmSpec> model_as_nbm(const Model& m) {
  if (const auto* n = std::get_if<model::Nbm>(&m)) return n->spec;
  if (const auto* p = std::get_if<model::Mp>(&m)) return mixing_as_nbm(p->mix);
  return std::nullopt;
}

inline bool method_applies(const Model& m, Method method) {
  switch (method) {
    case Method::exact:
    case Method::pk:
    case Method::simulate: return true;
    case Method::nbm: return model_as_nbm(m).has_value();
    case Method::mp1:
    case Method::mp2: return std::holds_alternative<model::Mp>(m);
  }
  return false;
}

struct JobSpec {
  Model model;
  std::vector<Method> methods;  // empty means every method that applies
  std::size_t u_max = 10;
  MpApproxConfig approx;
  SimConfig sim;
  bool timings = false;

  /// Methods in canonical order, defaulting to all that apply.
  std::vector<Method> resolved_methods() const {
    std::vector<Method> out;
    for (Method m : kAllMethods) {
      const bool asked = methods.empty() || std::find(methods.begin(), methods.end(), m) != methods.end();
      if (!asked) continue;
      if (!method_applies(model, m)) {
        if (methods.empty()) continue;
        throw DomainError("method " + method_name(m) + " does not apply to model " + describe(model));
      }
      out.push_back(m);
    }
    return out;
  }

  void validate() const {
    const double mu = model_mean(model);
    require_net_profit(mu, "job");
    std::visit(
        [](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, model::CompoundBinomial>) {
            x.spec.validate();
          } else if constexpr (std::is_same_v<T, model::Nbm>) {
            x.spec.validate();
          }
        },
        model);
    approx.validate();
    if (sim.replications < 1 || sim.horizon < 1) {
      throw DomainError("job: simulation replications and horizon must be positive");
    }
    resolved_methods();
  }
};

/// Reads a "x,pmf" CSV (header line required) as a complete pmf on 0..max x.
inline DiscretePmf load_pmf_csv(const std::string& path, double tol = 1e-10) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open pmf file " + path);
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty pmf file " + path);
  std::vector<double> f;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError(path + ": malformed line " + std::to_string(line_no));
    double xv = 0.0, pv = 0.0;
    try {
      xv = std::stod(line.substr(0, comma));
      pv = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw DomainError(path + ": non-numeric value on line " + std::to_string(line_no));
    }
    if (!(xv >= 0.0) || xv != std::floor(xv)) {
      throw DomainError(path + ": x must be a nonnegative integer on line " + std::to_string(line_no));
    }
    const auto x = static_cast<std::size_t>(xv);
    if (f.size() <= x) f.resize(x + 1, 0.0);
    f[x] += pv;
  }
  if (f.empty()) throw DomainError(path + ": no probabilities");
  return DiscretePmf::complete(std::move(f), std::nullopt, tol);
}

namespace detail {

/// Complete claim pmf of the model (for simulation).
inline DiscretePmf complete_claims(const Model& m) {
  return std::visit(
      [](const auto& x) -> DiscretePmf {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, model::GdPmf>) {
          return x.claims;
        } else if constexpr (std::is_same_v<T, model::CompoundBinomial>) {
          return convert_cb_to_gd(x.spec);
        } else if constexpr (std::is_same_v<T, model::Nbm>) {
          return nbm_to_pmf(x.spec);
        } else {
          return mp_claims_complete(x.mix);
        }
      },
      m);
}

/// Claim pmf good for reading f(0..u_max) (prefix or complete).
inline DiscretePmf claims_prefix(const Model& m, std::size_t u_max) {
  if (const auto* p = std::get_if<model::Mp>(&m)) return mp_claims(p->mix, u_max);
  return complete_claims(m);
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Runs every requested method for u = 0..u_max and returns the table.
/// Relative errors are against E when exact runs, otherwise against PK.
inline ResultTable run(const JobSpec& job) {
  job.validate();
  const auto methods = job.resolved_methods();
  const auto has = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };
  std::optional<Method> reference;
  if (has(Method::exact)) {
    reference = Method::exact;
  } else if (has(Method::pk)) {
    reference = Method::pk;
  }

  // column order: u,E,N1,err1,N2,err2,SIM,err_sim, then PK and NBM
  const std::array<Method, 6> order = {Method::exact, Method::mp1, Method::mp2,
                                       Method::simulate, Method::pk, Method::nbm};
  ResultTable table;
  for (Method m : order) {
    if (!has(m)) continue;
    table.add_column(method_column(m));
    if (reference && m != *reference) table.add_column(error_column(m));
  }
  for (std::size_t u = 0; u <= job.u_max; ++u) table.add_row(u);

  auto& meta = table.meta();
  meta["model"] = describe(job.model);
  meta["mean_claim"] = model_mean(job.model);
  {
    auto names = ResultTable::Json::array();
    for (Method m : methods) names.push_back(method_name(m));
    meta["methods"] = names;
  }
  meta["u_max"] = job.u_max;
  meta["reference"] = reference ? method_column(*reference) : "none";
  ResultTable::Json timings = ResultTable::Json::object();

  const auto fill = [&](Method m, const std::vector<double>& psi) {
    for (std::size_t u = 0; u <= job.u_max; ++u) table.set(u, method_column(m), psi[u]);
  };

  for (Method m : order) {
    if (!has(m)) continue;
    const detail::Stopwatch watch;
    switch (m) {
      case Method::exact: {
        if (const auto* p = std::get_if<model::Mp>(&job.model)) {
          fill(m, psi_mp_exact_reference(p->mix, job.u_max));
        } else {
          fill(m, psi_recursion(detail::claims_prefix(job.model, job.u_max), job.u_max));
        }
        break;
      }
      case Method::pk:
        fill(m, psi_pk_values(detail::claims_prefix(job.model, job.u_max), job.u_max));
        break;
      case Method::nbm: {
        const NbmRuin r(*model_as_nbm(job.model), job.u_max);
        fill(m, r.psi_values());
        meta["nbm_k_max"] = r.coefficients().cbar.size() - 1;
        break;
      }
      case Method::mp1:
      case Method::mp2: {
        // one coefficient sequence serves both methods
        if (!table.meta().contains("grid_terms")) {
          const auto& mix = std::get<model::Mp>(job.model).mix;
          const MpRuinApprox approx(mix, job.approx, job.u_max);
          const auto& seq = approx.coefficients();
          meta["n"] = job.approx.n;
          meta["pmf_floor"] = job.approx.pmf_floor;
          meta["grid_tol"] = job.approx.grid_tol;
          meta["grid_terms"] = seq.grid_terms;
          meta["grid_last_value"] = seq.last_grid_value;
          meta["k_max"] = seq.cbar_n.size() - 1;
          if (has(Method::mp1)) {
            auto kstar = ResultTable::Json::array();
            for (std::size_t u = 0; u <= job.u_max; ++u) {
              table.set(u, "N1", approx.method1(u));
              kstar.push_back(u == 0 ? 0 : truncation_index(u, job.approx.n, job.approx.pmf_floor));
            }
            meta["k_star"] = kstar;
          }
          if (has(Method::mp2)) {
            auto se = ResultTable::Json::array();
            for (std::size_t u = 0; u <= job.u_max; ++u) {
              const auto est = approx.method2(u, job.approx.seed);
              table.set(u, "N2", est.estimate);
              se.push_back(std::isnan(est.std_error) ? ResultTable::Json(nullptr) : ResultTable::Json(est.std_error));
            }
            meta["m"] = job.approx.m;
            meta["seed"] = job.approx.seed;
            meta["N2_std_error"] = se;
          }
        }
        break;
      }
      case Method::simulate: {
        SimConfig cfg = job.sim;
        cfg.u = 0;
        const auto s = simulate_paths(detail::complete_claims(job.model), cfg);
        auto se = ResultTable::Json::array();
        for (std::size_t u = 0; u <= job.u_max; ++u) {
          table.set(u, "SIM", s.psi_hat_at(u));
          se.push_back(s.std_error_at(u));
        }
        meta["sim_replications"] = cfg.replications;
        meta["sim_horizon"] = cfg.horizon;
        meta["sim_seed"] = cfg.seed;
        meta["sim_censored_fraction"] = s.censored_fraction();
        meta["sim_exit_deficit"] = s.exit_deficit;
        meta["sim_exit_bias_bound"] = s.exit_bias;
        meta["SIM_std_error"] = se;
        break;
      }
    }
    if (m == Method::mp2 && has(Method::mp1)) {
      timings["mp1"] = timings["mp1"].get<double>() + watch.seconds();
    } else {
      timings[method_name(m)] = watch.seconds();
    }
  }

  if (reference) {
    const auto ref = table.column(method_column(*reference));
    for (Method m : methods) {
      if (m == *reference) continue;
      for (std::size_t u = 0; u <= job.u_max; ++u) {
        if (ref[u] > 0.0) {
          table.set(u, error_column(m), (table.get(u, method_column(m)) - ref[u]) / ref[u]);
        }
      }
    }
  }
  if (job.timings) meta["runtime_seconds"] = timings;
  return table;
}

/// Reference values for u = 0..10 under MP claims with n = 500, m = 1000
/// (five decimals as published; PK to the precision given there).
struct PublishedTable {
  std::string name;
  MixingDistribution mix;
  std::array<double, 11> e, n1, n2, pk;
};

inline std::vector<PublishedTable> published_tables() {
  return {
      {"erlang_2_3",
       MixingDistribution::erlang(2, 3.0),
       {0.66667, 0.40741, 0.24280, 0.14358, 0.08469, 0.04992, 0.02942, 0.01733, 0.01021, 0.00602, 0.00355},
       {0.66667, 0.40775, 0.24328, 0.14401, 0.08504, 0.05018, 0.02960, 0.01746, 0.01030, 0.00607, 0.00358},
       {0.66667, 0.40326, 0.24551, 0.14317, 0.08647, 0.05063, 0.02989, 0.01732, 0.01009, 0.00586, 0.00335},
       {0.66667, 0.4089, 0.2397, 0.1456, 0.084, 0.0512, 0.0311, 0.0172, 0.0105, 0.0061, 0.0031}},
      {"pareto_3_1",
       MixingDistribution::pareto(3.0, 1.0),
       {0.50000, 0.28757, 0.18050, 0.12014, 0.08348, 0.06001, 0.04437, 0.03360, 0.02599, 0.02049, 0.01643},
       {0.50000, 0.28751, 0.18046, 0.12010, 0.08344, 0.05996, 0.04432, 0.03356, 0.02595, 0.02045, 0.01639},
       {0.50000, 0.28484, 0.18216, 0.11960, 0.08445, 0.06034, 0.04450, 0.03343, 0.02577, 0.02019, 0.01612},
       {0.50000, 0.29170, 0.17690, 0.12040, 0.08170, 0.06080, 0.04600, 0.03270, 0.02280, 0.02020, 0.01750}},
      {"lognormal_m1_1",
       MixingDistribution::lognormal(-1.0, 1.0),
       {0.60653, 0.38126, 0.25231, 0.17287, 0.12128, 0.08661, 0.06272, 0.04597, 0.03404, 0.02545, 0.01919},
       {0.60653, 0.38124, 0.25238, 0.17294, 0.12135, 0.08666, 0.06276, 0.04600, 0.03406, 0.02546, 0.01920},
       {0.60653, 0.37816, 0.25426, 0.17198, 0.12282, 0.08715, 0.06297, 0.04574, 0.03373, 0.02502, 0.01874},
       {0.60653, 0.37960, 0.25340, 0.17520, 0.12010, 0.08960, 0.06280, 0.04390, 0.03420, 0.02420, 0.02030}},
  };
}

struct NamedTable {
  std::string name;
  ResultTable table;
};

/// Runs exact, mp1, mp2 and simulate on the three reference mixing laws and
/// appends the published values (suffix _pub) and deltas (computed - published).
inline std::vector<NamedTable> reproduce_tables(const MpApproxConfig& approx = {}, const SimConfig& sim = {},
                                                bool timings = false) {
  std::vector<NamedTable> out;
  for (const auto& pub : published_tables()) {
    JobSpec job{model::Mp{pub.mix}, {Method::exact, Method::mp1, Method::mp2, Method::simulate}, 10, approx, sim,
                timings};
    ResultTable t = run(job);
    for (const std::string c : {"E_pub", "E_delta", "N1_pub", "N1_delta", "N2_pub", "N2_delta", "PK_pub"}) {
      t.add_column(c);
    }
    for (std::size_t u = 0; u <= 10; ++u) {
      t.set(u, "E_pub", pub.e[u]);
      t.set(u, "E_delta", t.get(u, "E") - pub.e[u]);
      t.set(u, "N1_pub", pub.n1[u]);
      t.set(u, "N1_delta", t.get(u, "N1") - pub.n1[u]);
      t.set(u, "N2_pub", pub.n2[u]);
      t.set(u, "N2_delta", t.get(u, "N2") - pub.n2[u]);
      t.set(u, "PK_pub", pub.pk[u]);
    }
    t.meta()["table"] = pub.name;
    out.push_back({pub.name, std::move(t)});
  }
  return out;
}

}  // namespace druin
