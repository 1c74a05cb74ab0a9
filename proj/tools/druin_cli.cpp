#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "druin/druin.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitOther = 1;

struct Options {
  std::string model = "mp";
  std::string pmf;
  double p = 0.5;
  std::string weights = "1";
  std::string mixing = "erlang";
  std::size_t k = 2;
  double beta = 3.0;
  double alpha = 3.0;
  double theta = 1.0;
  double mu_log = -1.0;
  double sigma_log = 1.0;
  double lambda0 = 0.5;
  std::string mixing_file;

  std::size_t u_max = 10;
  std::size_t n = 500;
  std::size_t m = 1000;
  std::uint64_t seed = 20240601;
  double floor = 1e-5;
  double grid_tol = 1e-10;
  std::size_t replications = 10000;
  std::size_t horizon = 100000;

  std::string out;
  std::string format = "csv";
  bool timings = false;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw druin::DomainError("--weights: '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw druin::DomainError("--weights: empty list");
  return out;
}

druin::MixingDistribution build_mixing(const Options& o) {
  using druin::MixingDistribution;
  if (o.mixing == "exp") return MixingDistribution::exponential(o.beta);
  if (o.mixing == "erlang") return MixingDistribution::erlang(o.k, o.beta);
  if (o.mixing == "erlangm") return MixingDistribution::erlang_mixture(parse_list(o.weights), o.beta);
  if (o.mixing == "pareto") return MixingDistribution::pareto(o.alpha, o.theta);
  if (o.mixing == "lognormal") return MixingDistribution::lognormal(o.mu_log, o.sigma_log);
  if (o.mixing == "degenerate") return MixingDistribution::degenerate(o.lambda0);
  if (o.mixing == "tabulated") {
    if (o.mixing_file.empty()) throw druin::DomainError("--mixing tabulated needs --mixing-file");
    return MixingDistribution::from_csv(o.mixing_file);
  }
  throw druin::DomainError("unknown mixing kind '" + o.mixing + "'");
}

druin::Model build_model(const Options& o) {
  namespace model = druin::model;
  if (o.model == "gd") {
    if (o.pmf.empty()) throw druin::DomainError("--model gd needs --pmf");
    return model::GdPmf{druin::load_pmf_csv(o.pmf), o.pmf};
  }
  if (o.model == "cb") {
    if (o.pmf.empty()) throw druin::DomainError("--model cb needs --pmf (claim size pmf)");
    return model::CompoundBinomial{druin::CompoundBinomialSpec{o.p, druin::load_pmf_csv(o.pmf)}, o.pmf};
  }
  if (o.model == "nbm") return model::Nbm{druin::NbmSpec{parse_list(o.weights), o.p, 0.0}};
  if (o.model == "mp") return model::Mp{build_mixing(o)};
  throw druin::DomainError("unknown model '" + o.model + "'");
}

druin::MpApproxConfig approx_config(const Options& o) {
  druin::MpApproxConfig c;
  c.n = o.n;
  c.m = o.m;
  c.seed = o.seed;
  c.pmf_floor = o.floor;
  c.grid_tol = o.grid_tol;
  return c;
}

druin::SimConfig sim_config(const Options& o) {
  druin::SimConfig c;
  c.replications = o.replications;
  c.horizon = o.horizon;
  c.seed = o.seed;
  return c;
}

std::string render(const druin::ResultTable& t, const std::string& format) {
  return format == "json" ? t.to_json_text() : t.to_csv();
}

std::string default_dir() {
  const char* env = std::getenv("DRUIN_OUT_DIR");
  return env ? std::string(env) : std::string();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  out << text;
  if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

/// --out file, --out dir, DRUIN_OUT_DIR, or stdout (empty path).
fs::path output_path(const Options& o, const std::string& stem) {
  const std::string name = stem + "." + o.format;
  if (!o.out.empty()) {
    const fs::path p(o.out);
    return fs::is_directory(p) ? p / name : p;
  }
  const std::string dir = default_dir();
  if (!dir.empty()) return fs::path(dir) / name;
  return {};
}

int run_job(const Options& o, const std::string& verb) {
  druin::JobSpec job{build_model(o), {}, o.u_max, approx_config(o), sim_config(o), o.timings};
  if (verb != "all") job.methods = {druin::parse_method(verb)};
  const auto table = druin::run(job);
  const auto text = render(table, o.format);
  const auto path = output_path(o, verb);
  if (path.empty()) {
    std::cout << text;
  } else {
    write_file(path, text);
  }
  return 0;
}

int run_tables(const Options& o) {
  fs::path dir = !o.out.empty() ? fs::path(o.out) : fs::path(default_dir());
  if (dir.empty()) dir = ".";
  for (const auto& t : druin::reproduce_tables(approx_config(o), sim_config(o), o.timings)) {
    const auto path = dir / (t.name + "." + o.format);
    write_file(path, render(t.table, o.format));
    std::cout << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ruin probabilities for discrete-time risk models"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read key=value settings (long option names as keys); flags override the file");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Options o;
  app.add_option("--model", o.model, "Claim model")->check(CLI::IsMember({"gd", "cb", "nbm", "mp"}))->capture_default_str();
  app.add_option("--pmf", o.pmf, "CSV 'x,pmf' file: claims (gd) or claim sizes (cb)");
  app.add_option("--p", o.p, "Claim probability (cb) or NegBin success probability (nbm)")->capture_default_str();
  app.add_option("--weights", o.weights, "Comma-separated weights q_1,q_2,... (nbm, erlangm)")->capture_default_str();
  app.add_option("--mixing", o.mixing, "Mixing law for mp")
      ->check(CLI::IsMember({"exp", "erlang", "erlangm", "pareto", "lognormal", "degenerate", "tabulated"}))
      ->capture_default_str();
  app.add_option("--k", o.k, "Erlang shape")->capture_default_str();
  app.add_option("--beta", o.beta, "Exponential/Erlang rate")->capture_default_str();
  app.add_option("--alpha", o.alpha, "Pareto shape")->capture_default_str();
  app.add_option("--theta", o.theta, "Pareto scale")->capture_default_str();
  app.add_option("--mu-log", o.mu_log, "Lognormal location")->capture_default_str();
  app.add_option("--sigma-log", o.sigma_log, "Lognormal scale")->capture_default_str();
  app.add_option("--lambda0", o.lambda0, "Degenerate mixing value")->capture_default_str();
  app.add_option("--mixing-file", o.mixing_file, "CSV 'lambda,cdf' file for tabulated mixing");

  app.add_option("--u-max", o.u_max, "Largest initial capital")->capture_default_str();
  app.add_option("--n", o.n, "Grid size for the mixed Poisson approximation")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--m", o.m, "Monte Carlo draws for mp2")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", o.seed, "Seed for mp2 and simulate")->capture_default_str();
  app.add_option("--floor", o.floor, "NegBin pmf floor for the mp1 truncation")->capture_default_str();
  app.add_option("--grid-tol", o.grid_tol, "Stop the survival grid below this value")->capture_default_str();
  app.add_option("--replications", o.replications, "Simulated paths")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--horizon", o.horizon, "Steps per simulated path")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--out", o.out, "Output file or directory (default: $DRUIN_OUT_DIR, else stdout)");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_flag("--timings", o.timings, "Include runtimes in the metadata");

  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"exact", "Exact recursion"},
      {"pk", "Pollaczek-Khinchine sum"},
      {"nbm", "NBM coefficient formula"},
      {"mp1", "Mixed Poisson approximation, truncated expectation"},
      {"mp2", "Mixed Poisson approximation, Monte Carlo"},
      {"simulate", "Path simulation"},
      {"all", "Every method that applies to the model"},
      {"tables", "Reproduce the three reference tables with published values and deltas"},
  };
  for (const auto& [name, help] : verbs) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    if (verb == "tables") return run_tables(o);
    return run_job(o, verb);
  } catch (const druin::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const druin::BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const druin::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const druin::QuadratureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}
