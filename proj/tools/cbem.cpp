// cbem: command-line front end for correlated binomial EM fitting.
//
// Exit statuses: 0 success, 1 usage error, 2 data error, 3 non-convergence.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cbem/cbem.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNotConverged = 3;
constexpr int kSchemaVersion = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string input_path;
  std::string output_path;
  std::string format = "text";
  std::string name;
  int n = 0;
  double p = 0.5;
  double rho = 0.0;
  std::size_t k = 30;
  std::size_t reps = 1000;
  std::optional<std::uint64_t> seed;
  std::string plot_dir;
  double start_p = 0.5;
  double start_rho = 0.5;
  std::size_t maxits = 1000;
  double eps = 1e-15;
  std::string stop_rule = "any";
  bool oracle = false;
  std::size_t resolution = 41;
  unsigned threads = 1;
};

cbem::EMConfig em_config(const RunConfig &cfg) {
  cbem::EMConfig em;
  em.start_p = cfg.start_p;
  em.start_rho = cfg.start_rho;
  em.max_iterations = cfg.maxits;
  em.epsilon = cfg.eps;
  em.stop_rule = cfg.stop_rule == "all" ? cbem::StopRule::all_components
                                        : cbem::StopRule::any_component;
  return em;
}

json em_params_json(const RunConfig &cfg) {
  return {{"start_p", cfg.start_p},
          {"start_rho", cfg.start_rho},
          {"maxits", cfg.maxits},
          {"eps", cfg.eps},
          {"stop_rule", cfg.stop_rule}};
}

std::uint64_t resolve_seed(const RunConfig &cfg) {
  if (cfg.seed)
    return *cfg.seed;
  std::random_device rd;
  const std::uint64_t seed =
      (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
  std::cerr << "no --seed given; using generated seed " << seed << '\n';
  return seed;
}

// Writes to --output when given, otherwise stdout.
void emit(const RunConfig &cfg, const std::string &text) {
  if (cfg.output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.output_path, std::ios::binary);
  if (!out)
    throw std::ios_base::failure("cannot open " + cfg.output_path);
  out << text;
}

std::string fixed7(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(7) << v;
  return os.str();
}

int run_fit(const RunConfig &cfg) {
  if (cfg.n < 1)
    throw UsageError("--n must be >= 1");
  const auto data = cbem::read_observations(fs::path(cfg.input_path), cfg.n);
  const auto fit = cbem::em_fit(data, em_config(cfg));
  std::optional<cbem::GridResult> grid;
  if (cfg.oracle)
    grid = cbem::grid_mle(data, {}, cfg.threads);

  if (cfg.format == "json") {
    json results = {{"p_hat", fit.p_hat},
                    {"rho_hat", fit.rho_hat},
                    {"iterations", fit.iterations},
                    {"converged_p", fit.converged_p},
                    {"converged_rho", fit.converged_rho},
                    {"converged", fit.converged()},
                    {"log_likelihood", fit.log_likelihood},
                    {"k", data.size()}};
    if (grid)
      results["oracle"] = {{"p", grid->p},
                           {"rho", grid->rho},
                           {"log_likelihood", grid->log_likelihood},
                           {"loglik_gap", fit.log_likelihood - grid->log_likelihood}};
    json params = em_params_json(cfg);
    params["n"] = cfg.n;
    params["input"] = cfg.input_path;
    const json report = {{"schema_version", kSchemaVersion},
                         {"command", "fit"},
                         {"params", params},
                         {"results", results},
                         {"seed", nullptr}};
    emit(cfg, report.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "CB EM fit: n = " << cfg.n << ", k = " << data.size()
       << ", start = (" << cfg.start_p << ", " << cfg.start_rho
       << "), maxits = " << cfg.maxits << ", eps = " << cfg.eps << '\n'
       << "p_hat          " << fixed7(fit.p_hat) << '\n'
       << "rho_hat        " << fixed7(fit.rho_hat) << '\n'
       << "iterations     " << fit.iterations << '\n'
       << "converged      " << std::boolalpha << fit.converged_p << ' '
       << fit.converged_rho << '\n'
       << "log_likelihood " << fixed7(fit.log_likelihood) << '\n'
       << "likelihood     " << std::scientific << std::setprecision(6)
       << std::exp(fit.log_likelihood) << std::defaultfloat << '\n';
    if (grid)
      os << "oracle p       " << fixed7(grid->p) << '\n'
         << "oracle rho     " << fixed7(grid->rho) << '\n'
         << "oracle loglik  " << fixed7(grid->log_likelihood) << '\n'
         << "loglik gap     " << std::scientific << std::setprecision(3)
         << fit.log_likelihood - grid->log_likelihood << '\n';
    emit(cfg, os.str());
  }
  if (!fit.converged()) {
    std::cerr << "EM stopped at max_iterations = " << cfg.maxits
              << " without converging\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

void write_plot_outputs(const fs::path &dir,
                        const std::vector<cbem::QuantilePolygon> &polys) {
  fs::create_directories(dir);
  for (const auto &poly : polys)
    cbem::write_polygon_csv(poly, dir / (poly.parameter_name + ".csv"));
  cbem::render_svg(polys, dir / "box_percentile.svg");
}

json summary_json(const cbem::ParameterSummary &s) {
  return {{"truth", s.truth},
          {"bias", s.bias},
          {"rmse", s.rmse},
          {"interval_low", s.interval_low},
          {"interval_high", s.interval_high}};
}

int run_simulate(const RunConfig &cfg) {
  cbem::Scenario scenario;
  scenario.params = {cfg.n, cfg.p, cfg.rho};
  scenario.sample_size = cfg.k;
  scenario.replications = cfg.reps;
  scenario.em_config = em_config(cfg);
  scenario.seed = resolve_seed(cfg);
  try {
    scenario.validate();
  } catch (const std::exception &e) {
    throw UsageError(e.what());
  }
  const auto report = cbem::run_scenario(scenario, cfg.threads);

  if (!cfg.plot_dir.empty()) {
    const fs::path dir(cfg.plot_dir);
    fs::create_directories(dir);
    for (const auto &[label, s] :
         {std::pair{"p", &report.p}, std::pair{"rho", &report.rho}}) {
      std::ofstream est(dir / (std::string("estimates_") + label + ".txt"));
      cbem::write_estimates(est, s->estimates);
    }
    write_plot_outputs(
        dir, {cbem::build_quantile_polygon(report.p.estimates, cfg.resolution, "p"),
              cbem::build_quantile_polygon(report.rho.estimates, cfg.resolution,
                                           "rho")});
  }

  if (cfg.format == "json") {
    json params = em_params_json(cfg);
    params["n"] = cfg.n;
    params["p"] = cfg.p;
    params["rho"] = cfg.rho;
    params["k"] = cfg.k;
    params["reps"] = cfg.reps;
    const json report_json = {
        {"schema_version", kSchemaVersion},
        {"command", "simulate"},
        {"params", params},
        {"results",
         {{"p", summary_json(report.p)},
          {"rho", summary_json(report.rho)},
          {"degenerate_count", report.degenerate_count},
          {"failed_count", report.failed_count}}},
        {"seed", scenario.seed}};
    emit(cfg, report_json.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "CB(" << cfg.n << ", " << cfg.p << ", " << cfg.rho << "), k = "
       << cfg.k << ", N = " << cfg.reps << ", seed = " << scenario.seed << '\n'
       << std::left << std::setw(6) << "param" << std::setw(15) << "bias"
       << std::setw(13) << "rmse" << "95% interval\n";
    for (const auto &[label, s] :
         {std::pair{"p", &report.p}, std::pair{"rho", &report.rho}}) {
      os << std::setw(6) << label << std::setw(15) << std::setprecision(7)
         << s->bias << std::setw(13) << s->rmse << '[' << s->interval_low
         << ", " << s->interval_high << "]\n";
    }
    os << "degenerate " << report.degenerate_count << ", failed "
       << report.failed_count << '\n';
    emit(cfg, os.str());
  }
  return kExitOk;
}

int run_pmf(const RunConfig &cfg) {
  const cbem::CBParams params{cfg.n, cfg.p, cfg.rho};
  try {
    params.validate();
  } catch (const std::exception &e) {
    throw UsageError(e.what());
  }
  std::vector<double> probs;
  double sum = 0.0;
  for (int y = 0; y <= cfg.n; ++y) {
    probs.push_back(cbem::cb_pmf(y, params));
    sum += probs.back();
  }
  if (cfg.format == "json") {
    const json report = {{"schema_version", kSchemaVersion},
                         {"command", "pmf"},
                         {"params", {{"n", cfg.n}, {"p", cfg.p}, {"rho", cfg.rho}}},
                         {"results", {{"pmf", probs}, {"sum", sum}}},
                         {"seed", nullptr}};
    emit(cfg, report.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "y\tprobability\n" << std::setprecision(12);
    for (int y = 0; y <= cfg.n; ++y)
      os << y << '\t' << probs[static_cast<std::size_t>(y)] << '\n';
    os << "sum\t" << sum << '\n';
    emit(cfg, os.str());
  }
  return kExitOk;
}

int run_sample(const RunConfig &cfg) {
  const cbem::CBParams params{cfg.n, cfg.p, cfg.rho};
  try {
    params.validate();
    if (cfg.k < 1)
      throw std::invalid_argument("--k must be >= 1");
  } catch (const std::exception &e) {
    throw UsageError(e.what());
  }
  const std::uint64_t seed = resolve_seed(cfg);
  const auto data = cbem::sample(params, cfg.k, seed);
  std::ostringstream header;
  header << "CB(n=" << cfg.n << ", p=" << cfg.p << ", rho=" << cfg.rho
         << ") k=" << cfg.k << " seed=" << seed;
  std::ofstream out(cfg.output_path, std::ios::binary);
  if (!out)
    throw std::ios_base::failure("cannot open " + cfg.output_path);
  cbem::write_observations(out, data, header.str());
  return kExitOk;
}

int run_plot(const RunConfig &cfg) {
  const auto estimates = cbem::read_estimates(fs::path(cfg.input_path));
  const std::string name =
      cfg.name.empty() ? fs::path(cfg.input_path).stem().string() : cfg.name;
  write_plot_outputs(fs::path(cfg.output_path),
                     {cbem::build_quantile_polygon(estimates, cfg.resolution, name)});
  return kExitOk;
}

void add_em_options(CLI::App *cmd, RunConfig &cfg) {
  cmd->add_option("--start-p", cfg.start_p, "EM start value for p")
      ->capture_default_str();
  cmd->add_option("--start-rho", cfg.start_rho, "EM start value for rho")
      ->capture_default_str();
  cmd->add_option("--maxits", cfg.maxits, "maximum EM iterations")
      ->capture_default_str();
  cmd->add_option("--eps", cfg.eps, "componentwise convergence tolerance")
      ->capture_default_str();
  cmd->add_option("--stop-rule", cfg.stop_rule,
                  "any: stop when p or rho converges; all: wait for both")
      ->check(CLI::IsMember({"any", "all"}))
      ->capture_default_str();
}

void add_format_option(CLI::App *cmd, RunConfig &cfg) {
  cmd->add_option("--format", cfg.format, "report format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Maximum-likelihood fitting of the correlated binomial "
               "distribution CB(n, p, rho) by EM"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto *fit = app.add_subcommand("fit", "fit (p, rho) to an observation file");
  fit->add_option("--input", cfg.input_path, "observation file")->required();
  fit->add_option("--n", cfg.n, "trials per observation")->required();
  add_em_options(fit, cfg);
  fit->add_flag("--oracle", cfg.oracle, "cross-check with the grid-search MLE");
  fit->add_option("--threads", cfg.threads, "grid-search threads (0 = all)");
  fit->add_option("--output", cfg.output_path, "write the report here");
  add_format_option(fit, cfg);

  auto *sim = app.add_subcommand("simulate", "Monte-Carlo bias/RMSE study");
  sim->add_option("--n", cfg.n, "trials per observation")->required();
  sim->add_option("--p", cfg.p, "true p")->required();
  sim->add_option("--rho", cfg.rho, "true rho")->required();
  sim->add_option("--k", cfg.k, "sample size per replication")
      ->capture_default_str();
  sim->add_option("--reps", cfg.reps, "replications")->capture_default_str();
  sim->add_option("--seed", cfg.seed, "master seed (generated and printed if omitted)");
  sim->add_option("--plot", cfg.plot_dir,
                  "write estimates, box-percentile SVG and CSV here");
  sim->add_option("--resolution", cfg.resolution, "quantile levels per glyph")
      ->capture_default_str();
  sim->add_option("--threads", cfg.threads, "replication threads (0 = all)");
  sim->add_option("--output", cfg.output_path, "write the report here");
  add_em_options(sim, cfg);
  add_format_option(sim, cfg);

  auto *pmf = app.add_subcommand("pmf", "print the CB probability table");
  pmf->add_option("--n", cfg.n, "trials")->required();
  pmf->add_option("--p", cfg.p, "success probability")->required();
  pmf->add_option("--rho", cfg.rho, "mixture weight")->required();
  pmf->add_option("--output", cfg.output_path, "write the table here");
  add_format_option(pmf, cfg);

  auto *smp = app.add_subcommand("sample", "draw a CB dataset");
  smp->add_option("--n", cfg.n, "trials")->required();
  smp->add_option("--p", cfg.p, "success probability")->required();
  smp->add_option("--rho", cfg.rho, "mixture weight")->required();
  smp->add_option("--k", cfg.k, "number of observations")->required();
  smp->add_option("--seed", cfg.seed, "seed (generated and printed if omitted)");
  smp->add_option("--output", cfg.output_path, "observation file to write")
      ->required();

  auto *plot = app.add_subcommand("plot", "box-percentile plot of estimates");
  plot->add_option("--input", cfg.input_path, "estimates file, one per line")
      ->required();
  plot->add_option("--output", cfg.output_path, "output directory")->required();
  plot->add_option("--name", cfg.name, "glyph label (default: file stem)");
  plot->add_option("--resolution", cfg.resolution, "quantile levels")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit)
      return run_fit(cfg);
    if (*sim)
      return run_simulate(cfg);
    if (*pmf)
      return run_pmf(cfg);
    if (*smp)
      return run_sample(cfg);
    if (*plot)
      return run_plot(cfg);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cbem::ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cbem::DataError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const cbem::DomainError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const cbem::FitDegeneracyError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
