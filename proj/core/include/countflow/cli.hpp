#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "countflow/copula.hpp"
#include "countflow/types.hpp"

namespace countflow {

// Seed used when neither a flag, a config file, nor COUNTFLOW_SEED
// provides one.
inline constexpr std::uint64_t kDefaultSeed = 12345;

enum class Command { Simulate, Fit, CheckStationarity, Diagnose, CopulaSelect };

// Everything a command run needs, assembled from (lowest to highest
// precedence) built-in defaults, the COUNTFLOW_SEED environment
// variable, a config file, and command-line flags. Matrices arrive as
// flat row-major lists; the dimension is taken from d.
struct RunConfig {
  Command command = Command::Simulate;

  std::string input;            // counts csv: fit, diagnose, copula-select
  std::string output_dir = "."; // where output files land
  std::string report;           // fit report json: copula-select

  ModelKind kind = ModelKind::Linear;
  std::optional<std::vector<double>> d_flat;
  std::optional<std::vector<double>> A_flat;
  std::optional<std::vector<double>> B_flat;

  CopulaFamily family = CopulaFamily::Independence;
  double phi = 0.0;

  long n = 0;
  long burn_in = 500;
  std::optional<std::vector<double>> init_flat;
  bool write_intensity = true;

  bool positive_transform = false;
  std::optional<std::vector<bool>> free_mask;
  int max_iterations = 500;
  double grad_tol = 1e-8;

  int max_lag = 40;
  double level = 0.95;

  std::vector<CopulaFamily> families{CopulaFamily::Gaussian, CopulaFamily::Clayton};
  std::map<CopulaFamily, std::vector<double>> grids;
  int replications = 1;

  std::uint64_t seed = kDefaultSeed;
  bool seed_set = false;  // explicit seed beats COUNTFLOW_SEED
  std::size_t workers = 0;
};

// Flat key=value view of a TOML or JSON config file. JSON files must
// hold one object; arrays are flattened to comma-joined strings. The
// TOML reader covers the flat subset used by the documented schema:
// key = number | "string" | true/false | [numbers], with optional
// [section] headers joining keys as section.key.
std::map<std::string, std::string> load_config_file(const std::string& path);

// Applies one config entry; throws on unknown keys or unparsable
// values so typos fail loudly.
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

// Executes the configured command, writing output files under
// config.output_dir and a short summary to `out`. Throws on any error.
void run_command(const RunConfig& config, std::ostream& out);

}  // namespace countflow
