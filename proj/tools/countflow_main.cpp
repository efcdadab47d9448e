#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "countflow/cli.hpp"

namespace {

struct CommandArgs {
  std::string config_path;
  // Flag overrides in command-line order; applied after the config file.
  std::vector<std::pair<std::string, std::string>> overrides;
};

// Registers --name whose value is forwarded to apply_config_entry under
// `key` when the flag is present.
void add_keyed(CLI::App* sub, CommandArgs& args, const std::string& name,
               const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(
      name, [&args, key](const std::string& v) { args.overrides.emplace_back(key, v); }, help);
}

void add_common(CLI::App* sub, CommandArgs& args) {
  sub->add_option("--config", args.config_path, "TOML or JSON config file (flags override it)")
      ->check(CLI::ExistingFile);
  add_keyed(sub, args, "--output", "output", "output directory (default: current directory)");
  add_keyed(sub, args, "--seed", "seed", "RNG seed (overrides COUNTFLOW_SEED)");
  add_keyed(sub, args, "--workers", "workers", "worker cap, 0 = hardware default");
}

void add_model_matrices(CLI::App* sub, CommandArgs& args) {
  add_keyed(sub, args, "--kind", "kind", "model kind: linear or loglinear");
  add_keyed(sub, args, "--d", "d", "intercept, comma-separated (length p)");
  add_keyed(sub, args, "--A", "A", "feedback matrix, row-major comma-separated (p*p values)");
  add_keyed(sub, args, "--B", "B", "count matrix, row-major comma-separated (p*p values)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"countflow: multivariate count time series with copula-linked Poisson marginals"};
  app.require_subcommand(1);

  CommandArgs args;
  std::vector<std::pair<CLI::App*, countflow::Command>> dispatch;

  CLI::App* sim = app.add_subcommand("simulate", "simulate a count path from given parameters");
  add_model_matrices(sim, args);
  add_keyed(sim, args, "--family", "family", "copula family: independence, gaussian, clayton");
  add_keyed(sim, args, "--phi", "phi", "copula parameter");
  add_keyed(sim, args, "--n", "n", "number of time points to keep");
  add_keyed(sim, args, "--burn-in", "burn_in", "discarded warm-up steps (default 500)");
  add_keyed(sim, args, "--init", "init", "initial state, comma-separated (default: model-based)");
  sim->add_flag_callback(
      "--no-intensity",
      [&args] { args.overrides.emplace_back("write_intensity", "false"); },
      "skip writing intensity.csv");
  add_common(sim, args);
  dispatch.emplace_back(sim, countflow::Command::Simulate);

  CLI::App* fit = app.add_subcommand("fit", "quasi-maximum-likelihood fit to a counts CSV");
  add_keyed(fit, args, "input,--input", "input", "counts CSV");
  add_keyed(fit, args, "--kind", "kind", "model kind: linear or loglinear");
  fit->add_flag_callback(
      "--positive-transform",
      [&args] { args.overrides.emplace_back("positive_transform", "true"); },
      "search in log coordinates so linear parameters stay positive");
  add_keyed(fit, args, "--mask", "mask",
            "0/1 per theta entry, 0 pins the entry at its starting value");
  add_keyed(fit, args, "--max-iterations", "max_iterations", "optimizer iteration cap");
  add_keyed(fit, args, "--grad-tol", "grad_tol", "gradient max-norm tolerance");
  add_common(fit, args);
  dispatch.emplace_back(fit, countflow::Command::Fit);

  CLI::App* chk = app.add_subcommand("check-stationarity",
                                     "evaluate stationarity conditions for given parameters");
  add_model_matrices(chk, args);
  add_common(chk, args);
  dispatch.emplace_back(chk, countflow::Command::CheckStationarity);

  CLI::App* diag = app.add_subcommand("diagnose",
                                      "correlogram, cumulative periodogram and dispersion");
  add_keyed(diag, args, "input,--input", "input", "CSV of counts or residuals");
  add_keyed(diag, args, "--max-lag", "max_lag", "largest correlogram lag (default 40)");
  add_keyed(diag, args, "--level", "level", "periodogram band level, 0.95 or 0.99");
  add_common(diag, args);
  dispatch.emplace_back(diag, countflow::Command::Diagnose);

  CLI::App* sel = app.add_subcommand("copula-select",
                                     "pick the copula family and parameter for a fitted model");
  add_keyed(sel, args, "input,--input", "input", "counts CSV the model was fitted to");
  add_keyed(sel, args, "--report", "report", "fit_report.json from the fit command");
  add_keyed(sel, args, "--families", "families", "candidate families, comma-separated");
  add_keyed(sel, args, "--clayton-grid", "clayton_grid", "phi grid for clayton");
  add_keyed(sel, args, "--gaussian-grid", "gaussian_grid", "phi grid for gaussian");
  add_keyed(sel, args, "--replications", "replications", "bootstrap repetitions (default 1)");
  add_common(sel, args);
  dispatch.emplace_back(sel, countflow::Command::CopulaSelect);

  CLI11_PARSE(app, argc, argv);

  try {
    countflow::RunConfig config;
    for (const auto& [sub, cmd] : dispatch) {
      if (sub->parsed()) config.command = cmd;
    }
    if (!args.config_path.empty()) {
      for (const auto& [key, value] : countflow::load_config_file(args.config_path)) {
        countflow::apply_config_entry(config, key, value);
      }
    }
    for (const auto& [key, value] : args.overrides) {
      countflow::apply_config_entry(config, key, value);
    }
    countflow::run_command(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
