// shrink: estimation, phi tables, minimaxity checks, risk simulation and
// identity self-tests from the command line.
//
// Exit codes: 0 success, 1 invalid input, 2 I/O error, 3 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "shrink/cli.hpp"
#include "shrink/errors.hpp"

namespace {

struct Flags {
  std::optional<std::string> input, config, format, output, grid, log_grid, lin_grid, model;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<int> p, n;
  std::optional<double> a, b, e, sigma2, alpha, beta, gamma;
  bool intercept = false;
  bool spherical = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration; flags override it");
  cmd->add_option("--format", f.format, "json, csv or table")
      ->check(CLI::IsMember({"json", "csv", "table"}));
  cmd->add_option("--output", f.output, "write to this file instead of stdout");
  cmd->add_option("--p", f.p, "coefficient dimension");
  cmd->add_option("--n", f.n, "residual degrees of freedom");
  cmd->add_option("--a", f.a, "prior exponent a");
  cmd->add_option("--b", f.b, "prior exponent b");
  cmd->add_option("--e", f.e, "prior exponent e");
}

void add_grid(CLI::App* cmd, Flags& f, const std::string& what) {
  cmd->add_option("--grid", f.grid, "comma separated " + what);
  cmd->add_option("--log-grid", f.log_grid, "lo,hi,n log-spaced " + what);
  cmd->add_option("--lin-grid", f.lin_grid, "lo,hi,n evenly spaced " + what);
}

void add_sampling(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--samples", f.samples, "Monte Carlo draws");
  cmd->add_option("--sigma2", f.sigma2, "error scale sigma^2");
}

shrink::cli::RunConfig build_config(const Flags& f) {
  using namespace shrink::cli;
  RunConfig cfg = f.config ? load_config(*f.config) : RunConfig{};
  if (f.input) cfg.input = *f.input;
  if (f.intercept) cfg.intercept = true;
  if (f.format) cfg.format = parse_format(*f.format);
  if (f.p) cfg.hp.p = *f.p;
  if (f.n) cfg.hp.n = *f.n;
  if (f.a) cfg.hp.a = *f.a;
  if (f.b) cfg.hp.b = *f.b;
  if (f.e) cfg.hp.e = *f.e;
  if (f.seed) cfg.seed = *f.seed;
  if (f.samples) cfg.count = *f.samples;
  if (f.sigma2) cfg.sigma2 = *f.sigma2;
  if (f.model) cfg.model = shrink::risksim::parse_model(*f.model);
  if (f.spherical) cfg.spherical = true;
  if (f.alpha) cfg.hypergeom.alpha = *f.alpha;
  if (f.beta) cfg.hypergeom.beta = *f.beta;
  if (f.gamma) cfg.hypergeom.gamma = *f.gamma;
  const int grids = (f.grid ? 1 : 0) + (f.log_grid ? 1 : 0) + (f.lin_grid ? 1 : 0);
  if (grids > 1) throw shrink::ValidationError("give at most one of --grid, --log-grid, --lin-grid");
  if (f.grid) cfg.grid = parse_list(*f.grid);
  if (f.log_grid) cfg.grid = parse_grid_range(*f.log_grid, true);
  if (f.lin_grid) cfg.grid = parse_grid_range(*f.lin_grid, false);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Bayes shrinkage estimation of regression coefficients"};
  app.require_subcommand(1);
  Flags f;

  auto* est = app.add_subcommand("estimate", "shrinkage estimate of beta from a CSV file");
  add_common(est, f);
  est->add_option("--input", f.input, "CSV: response first, design columns after");
  est->add_flag("--intercept", f.intercept, "prepend a column of ones to the design");

  auto* phi = app.add_subcommand("phi", "tabulate phi(w) by both methods");
  add_common(phi, f);
  add_grid(phi, f, "w values");

  auto* check = app.add_subcommand("check", "minimaxity verdicts");
  add_common(check, f);
  check->add_flag("--spherical", f.spherical, "b = -a-2 family under a spherical error law");
  check->add_option("--model", f.model, "error law for the moment condition");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo risk curve against least squares");
  add_common(sim, f);
  add_grid(sim, f, "|theta| values");
  add_sampling(sim, f);
  sim->add_option("--model", f.model,
                  "normal, student_t:df, contaminated_normal:eps,scale, fixed_radius:r");

  auto* ids = app.add_subcommand("identities", "2F1 identity residuals and Stein checks");
  add_common(ids, f);
  add_grid(ids, f, "z values in (0, 1)");
  add_sampling(ids, f);
  ids->add_option("--alpha", f.alpha, "2F1 alpha");
  ids->add_option("--beta", f.beta, "2F1 beta");
  ids->add_option("--gamma", f.gamma, "2F1 gamma");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const auto cfg = build_config(f);
    const std::string name = app.get_subcommands().front()->get_name();
    const std::string text = shrink::cli::run(name, cfg);
    if (f.output) {
      std::ofstream out(*f.output, std::ios::binary);
      if (!out) throw shrink::IoError("cannot write '" + *f.output + "'");
      out << text;
      if (!out) throw shrink::IoError("write failed for '" + *f.output + "'");
    } else {
      std::cout << text;
    }
    return 0;
  } catch (const shrink::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const shrink::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const shrink::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
