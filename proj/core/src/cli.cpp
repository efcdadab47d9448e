#include "countflow/cli.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "countflow/diagnostics.hpp"
#include "countflow/inference.hpp"
#include "countflow/io.hpp"
#include "countflow/lgc.hpp"
#include "countflow/model.hpp"
#include "countflow/simulate.hpp"
#include "countflow/stationarity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace countflow {

namespace {

std::vector<double> parse_number_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::size_t a = tok.find_first_not_of(" \t");
    const std::size_t b = tok.find_last_not_of(" \t");
    if (a == std::string::npos) throw std::runtime_error(what + ": empty element in '" + s + "'");
    tok = tok.substr(a, b - a + 1);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) {
      throw std::runtime_error(what + ": '" + tok + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw std::runtime_error(what + ": empty list");
  return out;
}

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  const std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string json_scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_double(v.get<double>());
  throw std::runtime_error("config: unsupported value type");
}

void flatten_json_value(const json& v, std::vector<std::string>& parts) {
  if (v.is_array()) {
    for (const auto& e : v) flatten_json_value(e, parts);
    return;
  }
  parts.push_back(json_scalar_to_string(v));
}

std::map<std::string, std::string> load_json_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json root = json::parse(in, nullptr, true, true);
  if (!root.is_object()) throw std::runtime_error(path + ": config root must be an object");
  std::map<std::string, std::string> out;
  for (const auto& [key, value] : root.items()) {
    if (value.is_array()) {
      std::vector<std::string> parts;
      flatten_json_value(value, parts);
      std::string joined;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) joined += ",";
        joined += parts[i];
      }
      out[key] = joined;
    } else {
      out[key] = json_scalar_to_string(value);
    }
  }
  return out;
}

std::map<std::string, std::string> load_toml_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed entry");
    }
    if (!section.empty()) key = section + "." + key;
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unterminated string");
      }
      value = value.substr(1, value.size() - 2);
    } else if (value.front() == '[') {
      if (value.back() != ']') {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": arrays must close on the same line");
      }
      // Flatten to the comma-joined canonical form.
      std::string inner = value.substr(1, value.size() - 2);
      for (char& c : inner) {
        if (c == '[' || c == ']') c = ' ';
      }
      std::string joined;
      for (const double v : parse_number_list(inner, path)) {
        if (!joined.empty()) joined += ",";
        joined += format_double(v);
      }
      value = joined;
    }
    out[key] = value;
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config key '" + key + "': expected a boolean, got '" + v + "'");
}

long parse_long(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const long out = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

double parse_double_value(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw std::runtime_error("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return x;
}

}  // namespace

std::map<std::string, std::string> load_config_file(const std::string& path) {
  const fs::path p(path);
  const std::string ext = p.extension().string();
  if (ext == ".json") return load_json_config(path);
  if (ext == ".toml") return load_toml_config(path);
  throw std::runtime_error(path + ": config files must end in .json or .toml");
}

void apply_config_entry(RunConfig& config, const std::string& full_key, const std::string& value) {
  // Config files may group keys under sections; only the leaf matters.
  const std::size_t dot = full_key.rfind('.');
  const std::string key = dot == std::string::npos ? full_key : full_key.substr(dot + 1);
  if (key == "input") {
    config.input = value;
  } else if (key == "output") {
    config.output_dir = value;
  } else if (key == "report") {
    config.report = value;
  } else if (key == "kind") {
    if (value == "linear") {
      config.kind = ModelKind::Linear;
    } else if (value == "loglinear" || value == "log-linear") {
      config.kind = ModelKind::LogLinear;
    } else {
      throw std::runtime_error("config key 'kind': expected linear or loglinear");
    }
  } else if (key == "d") {
    config.d_flat = parse_number_list(value, "d");
  } else if (key == "A") {
    config.A_flat = parse_number_list(value, "A");
  } else if (key == "B") {
    config.B_flat = parse_number_list(value, "B");
  } else if (key == "init") {
    config.init_flat = parse_number_list(value, "init");
  } else if (key == "family") {
    config.family = family_from_name(value);
  } else if (key == "phi") {
    config.phi = parse_double_value(value, key);
  } else if (key == "n") {
    config.n = parse_long(value, key);
  } else if (key == "burn_in") {
    config.burn_in = parse_long(value, key);
  } else if (key == "write_intensity") {
    config.write_intensity = parse_bool(value, key);
  } else if (key == "positive_transform") {
    config.positive_transform = parse_bool(value, key);
  } else if (key == "mask") {
    std::vector<bool> mask;
    for (const double v : parse_number_list(value, "mask")) {
      if (v != 0.0 && v != 1.0) throw std::runtime_error("config key 'mask': entries must be 0 or 1");
      mask.push_back(v != 0.0);
    }
    config.free_mask = mask;
  } else if (key == "max_iterations") {
    config.max_iterations = static_cast<int>(parse_long(value, key));
  } else if (key == "grad_tol") {
    config.grad_tol = parse_double_value(value, key);
  } else if (key == "max_lag") {
    config.max_lag = static_cast<int>(parse_long(value, key));
  } else if (key == "level") {
    config.level = parse_double_value(value, key);
  } else if (key == "families") {
    std::vector<CopulaFamily> fams;
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) fams.push_back(family_from_name(trim(tok)));
    if (fams.empty()) throw std::runtime_error("config key 'families': empty list");
    config.families = fams;
  } else if (key == "clayton_grid") {
    config.grids[CopulaFamily::Clayton] = parse_number_list(value, key);
  } else if (key == "gaussian_grid") {
    config.grids[CopulaFamily::Gaussian] = parse_number_list(value, key);
  } else if (key == "replications") {
    config.replications = static_cast<int>(parse_long(value, key));
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(parse_long(value, key));
    config.seed_set = true;
  } else if (key == "workers") {
    config.workers = static_cast<std::size_t>(parse_long(value, key));
  } else {
    throw std::runtime_error("unknown config key '" + full_key + "'");
  }
}

namespace {

std::uint64_t resolve_seed(const RunConfig& config) {
  if (config.seed_set) return config.seed;
  if (const char* env = std::getenv("COUNTFLOW_SEED")) {
    try {
      return static_cast<std::uint64_t>(std::stoull(env));
    } catch (const std::exception&) {
      throw std::runtime_error("COUNTFLOW_SEED is not an integer");
    }
  }
  return kDefaultSeed;
}

ModelParams params_from_config(const RunConfig& config) {
  if (!config.d_flat || !config.A_flat || !config.B_flat) {
    throw std::runtime_error("this command needs d, A and B");
  }
  const std::size_t p = config.d_flat->size();
  if (config.A_flat->size() != p * p || config.B_flat->size() != p * p) {
    throw std::runtime_error("A and B must each hold p*p = " + std::to_string(p * p) +
                             " entries (row-major)");
  }
  ModelParams params;
  params.kind = config.kind;
  params.d = Eigen::Map<const Eigen::VectorXd>(config.d_flat->data(),
                                               static_cast<Eigen::Index>(p));
  params.A.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  params.B.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      params.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (*config.A_flat)[i * p + j];
      params.B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (*config.B_flat)[i * p + j];
    }
  }
  return params;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string sanitize(const std::string& label) {
  std::string out;
  for (const char c : label) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  }
  return out.empty() ? "col" : out;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json norms_json(const ModelParams& params) {
  return json{
      {"norm2_A_plus_B", operator_norm(params.A + params.B, MatrixNorm::Two)},
      {"norm2_A_plus_norm2_B", operator_norm(params.A, MatrixNorm::Two) +
                                   operator_norm(params.B, MatrixNorm::Two)},
      {"norm1_A_plus_norm1_B", operator_norm(params.A, MatrixNorm::One) +
                                   operator_norm(params.B, MatrixNorm::One)},
  };
}

void run_simulate(const RunConfig& config, std::ostream& out) {
  ModelParams params = params_from_config(config);
  params.validate();
  CopulaSpec spec{config.family, config.phi};
  SimulationConfig sim_cfg;
  sim_cfg.n = config.n;
  sim_cfg.burn_in = config.burn_in;
  sim_cfg.seed = resolve_seed(config);
  if (config.init_flat) {
    if (config.init_flat->size() != static_cast<std::size_t>(params.dim())) {
      throw std::runtime_error("init must have p entries");
    }
    sim_cfg.initial_state = Eigen::Map<const Eigen::VectorXd>(
        config.init_flat->data(), params.dim());
  }
  const SimulationResult sim = simulate_path(params, spec, sim_cfg);
  for (const auto& w : sim.warnings) out << "warning: " << w << "\n";

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  write_counts_csv((dir / "counts.csv").string(), sim.counts);
  if (config.write_intensity) {
    std::vector<std::string> ilabels;
    for (const auto& l : sim.counts.labels) ilabels.push_back("lambda_" + l);
    write_matrix_csv((dir / "intensity.csv").string(), sim.intensity.means(), ilabels);
  }
  out << "simulated " << sim.counts.n() << " x " << sim.counts.p() << " counts ("
      << family_name(spec.family) << " copula, phi = " << fmt(spec.phi) << ", seed "
      << sim_cfg.seed << ")\n";
  const Eigen::VectorXd mean = sim.counts.values.colwise().mean();
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    out << "  " << sim.counts.labels[static_cast<std::size_t>(j)] << ": mean "
        << fmt(mean(j)) << "\n";
  }
}

void run_fit(const RunConfig& config, std::ostream& out) {
  if (config.input.empty()) throw std::runtime_error("fit needs an input counts csv");
  const CountSeries y = read_counts_csv(config.input);
  FitOptions fopts;
  fopts.max_iterations = config.max_iterations;
  fopts.grad_tol = config.grad_tol;
  fopts.positive_transform = config.positive_transform;
  fopts.free_mask = config.free_mask;
  const FitResult res = fit(config.kind, y, fopts);

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);

  const Eigen::Index p = y.p();
  json report{
      {"model_kind", config.kind == ModelKind::Linear ? "linear" : "loglinear"},
      {"labels", y.labels},
      {"n", y.n()},
      {"p", p},
      {"theta",
       {{"d", vector_to_json(res.params.d)},
        {"A", matrix_to_json(res.params.A)},
        {"B", matrix_to_json(res.params.B)},
        {"flat", vector_to_json(res.theta)}}},
      {"se", vector_to_json(res.std_errors)},
      {"loglik", res.loglik},
      {"convergence",
       {{"iterations", res.convergence.iterations},
        {"grad_norm", res.convergence.grad_norm},
        {"status", res.convergence.status}}},
      {"norms", norms_json(res.params)},
  };
  write_json_file(dir / "fit_report.json", report);

  std::vector<std::string> ilabels;
  for (const auto& l : y.labels) ilabels.push_back("lambda_" + sanitize(l));
  write_matrix_csv((dir / "fitted_intensity.csv").string(), res.fitted_intensity.means(),
                   ilabels);
  write_matrix_csv((dir / "residuals.csv").string(), pearson_residuals(y, res.fitted_intensity),
                   y.labels);

  out << "fit: " << (config.kind == ModelKind::Linear ? "linear" : "loglinear") << ", n = "
      << y.n() << ", p = " << p << "\n";
  out << "loglik = " << fmt(res.loglik) << ", " << res.convergence.status << " after "
      << res.convergence.iterations << " iterations (grad max-norm "
      << fmt(res.convergence.grad_norm) << ")\n";
  out << "           estimate     std.err\n";
  const auto print_param = [&](const std::string& name, double est, double se) {
    out << "  " << name;
    for (std::size_t k = name.size(); k < 9; ++k) out << ' ';
    out << fmt(est) << "\t" << fmt(se) << "\n";
  };
  for (Eigen::Index i = 0; i < p; ++i) {
    print_param("d[" + std::to_string(i + 1) + "]", res.params.d(i), res.std_errors(i));
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      print_param("A[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]",
                  res.params.A(i, j), res.std_errors(p + j * p + i));
    }
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      print_param("B[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]",
                  res.params.B(i, j), res.std_errors(p + p * p + j * p + i));
    }
  }
}

void run_check_stationarity(const RunConfig& config, std::ostream& out) {
  ModelParams params = params_from_config(config);
  const StationarityReport rep = check_conditions(params);

  const char* spectral_label = params.kind == ModelKind::Linear
                                   ? "|||A + B|||_2          "
                                   : "|||A|||_2 + |||B|||_2  ";
  const double spectral =
      params.kind == ModelKind::Linear ? rep.norm2_A_plus_B : rep.norm2_A_plus_norm2_B;
  out << "kind: " << (params.kind == ModelKind::Linear ? "linear" : "loglinear") << "\n";
  out << spectral_label << "= " << fmt(spectral) << "  (< 1: " << (rep.spectral_pass ? "yes" : "no")
      << ")\n";
  out << "|||A|||_1 + |||B|||_1  = " << fmt(rep.norm1_A_plus_norm1_B) << "  (< 1: "
      << (rep.column_sum_pass ? "yes" : "no") << ")\n";
  out << "sum_j |||A^j B|||_2    = " << fmt(rep.series.sum) << "  (< 1: "
      << (rep.series_pass ? "yes" : "no") << ", truncated at j = " << rep.series.truncated_at
      << (rep.series.converged ? "" : ", not converged") << ")\n";
  out << "stationary by at least one criterion: " << (rep.any_pass ? "yes" : "no") << "\n";

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  json j{
      {"kind", params.kind == ModelKind::Linear ? "linear" : "loglinear"},
      {"norm2_A_plus_B", rep.norm2_A_plus_B},
      {"norm2_A_plus_norm2_B", rep.norm2_A_plus_norm2_B},
      {"norm1_A_plus_norm1_B", rep.norm1_A_plus_norm1_B},
      {"series",
       {{"sum", rep.series.sum},
        {"truncated_at", rep.series.truncated_at},
        {"converged", rep.series.converged}}},
      {"flags",
       {{"spectral", rep.spectral_pass},
        {"column_sum", rep.column_sum_pass},
        {"series", rep.series_pass},
        {"any", rep.any_pass}}},
  };
  write_json_file(dir / "stationarity.json", j);
}

void run_diagnose(const RunConfig& config, std::ostream& out) {
  if (config.input.empty()) throw std::runtime_error("diagnose needs an input csv");
  std::vector<std::string> labels;
  const Eigen::MatrixXd x = read_matrix_csv(config.input, &labels);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 4) throw std::runtime_error("diagnose: series too short");

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);

  const int lag = std::min<long>(config.max_lag, n - 1);
  const Correlogram cg = correlogram(x, lag);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      Eigen::MatrixXd curve(lag + 1, 4);
      for (int h = 0; h <= lag; ++h) {
        curve(h, 0) = h;
        curve(h, 1) = cg.values[static_cast<std::size_t>(h)](i, j);
        curve(h, 2) = -cg.band;
        curve(h, 3) = cg.band;
      }
      const std::string name = "correlogram_" + sanitize(labels[static_cast<std::size_t>(i)]) +
                               "_" + sanitize(labels[static_cast<std::size_t>(j)]) + ".csv";
      write_matrix_csv((dir / name).string(), curve, {"lag", "correlation", "lo", "hi"});
    }
  }

  for (Eigen::Index j = 0; j < p; ++j) {
    const CumulativePeriodogram cp = cumulative_periodogram(x.col(j), config.level);
    const Eigen::Index m = cp.cumulative.size();
    Eigen::MatrixXd curve(m, 4);
    for (Eigen::Index k = 0; k < m; ++k) {
      const double mid = static_cast<double>(k + 1) / static_cast<double>(m);
      curve(k, 0) = cp.frequency(k);
      curve(k, 1) = cp.cumulative(k);
      curve(k, 2) = mid - cp.band_halfwidth;
      curve(k, 3) = mid + cp.band_halfwidth;
    }
    const std::string name = "cpgram_" + sanitize(labels[static_cast<std::size_t>(j)]) + ".csv";
    write_matrix_csv((dir / name).string(), curve, {"frequency", "cumulative", "lo", "hi"});
    out << "cpgram " << labels[static_cast<std::size_t>(j)] << ": max deviation "
        << fmt(cp.max_deviation) << (cp.inside_band ? " inside " : " OUTSIDE ") << fmt(100 * config.level)
        << "% band (halfwidth " << fmt(cp.band_halfwidth) << ")\n";
  }

  const OverdispersionSummary od = overdispersion_summary(x);
  json odj = json::object();
  out << "            mean    variance    ratio\n";
  for (Eigen::Index j = 0; j < p; ++j) {
    const std::string& l = labels[static_cast<std::size_t>(j)];
    odj[l] = {{"mean", od.mean(j)}, {"variance", od.variance(j)}, {"ratio", od.ratio(j)}};
    out << "  " << l;
    for (std::size_t k = l.size(); k < 9; ++k) out << ' ';
    out << fmt(od.mean(j)) << "\t" << fmt(od.variance(j)) << "\t" << fmt(od.ratio(j)) << "\n";
  }
  write_json_file(dir / "overdispersion.json", odj);
}

void run_copula_select(const RunConfig& config, std::ostream& out) {
  if (config.input.empty()) throw std::runtime_error("copula-select needs an input counts csv");
  if (config.report.empty()) throw std::runtime_error("copula-select needs a fit report json");
  const CountSeries y = read_counts_csv(config.input);

  std::ifstream rin(config.report);
  if (!rin) throw std::runtime_error("cannot open " + config.report);
  const json report = json::parse(rin);
  FitResult fitted;
  const std::string kind_name = report.at("model_kind").get<std::string>();
  const ModelKind kind = kind_name == "linear" ? ModelKind::Linear : ModelKind::LogLinear;
  const auto& theta = report.at("theta");
  const auto d = theta.at("d").get<std::vector<double>>();
  const Eigen::Index p = static_cast<Eigen::Index>(d.size());
  fitted.params.kind = kind;
  fitted.params.d = Eigen::Map<const Eigen::VectorXd>(d.data(), p);
  fitted.params.A.resize(p, p);
  fitted.params.B.resize(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto arow = theta.at("A").at(static_cast<std::size_t>(i)).get<std::vector<double>>();
    const auto brow = theta.at("B").at(static_cast<std::size_t>(i)).get<std::vector<double>>();
    for (Eigen::Index j = 0; j < p; ++j) {
      fitted.params.A(i, j) = arow[static_cast<std::size_t>(j)];
      fitted.params.B(i, j) = brow[static_cast<std::size_t>(j)];
    }
  }
  fitted.theta = pack_theta(fitted.params);

  CopulaSelectOptions opts;
  opts.families = config.families;
  opts.grids = config.grids;
  opts.replications = config.replications;
  opts.seed = resolve_seed(config);
  opts.workers = config.workers;
  const CopulaSelection sel = copula_select(y, fitted, opts);

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  json votes = json::object();
  for (const auto& [name, v] : sel.bootstrap.votes) votes[name] = v;
  json j{
      {"chosen_family", family_name(sel.chosen_family)},
      {"phi_hat", sel.phi_hat},
      {"distance", sel.distance},
      {"bootstrap",
       {{"replications", sel.bootstrap.replications},
        {"votes", votes},
        {"phi_mean", sel.bootstrap.phi_mean},
        {"phi_se", sel.bootstrap.phi_se}}},
  };
  write_json_file(dir / "copula_selection.json", j);

  for (const auto& [name, curve] : sel.curves) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(curve.size()), 2);
    for (std::size_t k = 0; k < curve.size(); ++k) {
      m(static_cast<Eigen::Index>(k), 0) = curve[k].first;
      m(static_cast<Eigen::Index>(k), 1) = curve[k].second;
    }
    write_matrix_csv((dir / ("distance_" + name + ".csv")).string(), m, {"phi", "distance"});
  }

  out << "chosen family: " << family_name(sel.chosen_family) << ", phi = " << fmt(sel.phi_hat)
      << " (mean distance " << fmt(sel.distance) << ")\n";
  out << "votes over " << sel.bootstrap.replications << " replications:";
  for (const auto& [name, v] : sel.bootstrap.votes) out << " " << name << "=" << v;
  out << "\n";
}

}  // namespace

void run_command(const RunConfig& config, std::ostream& out) {
  switch (config.command) {
    case Command::Simulate: run_simulate(config, out); return;
    case Command::Fit: run_fit(config, out); return;
    case Command::CheckStationarity: run_check_stationarity(config, out); return;
    case Command::Diagnose: run_diagnose(config, out); return;
    case Command::CopulaSelect: run_copula_select(config, out); return;
  }
  throw std::runtime_error("run_command: unknown command");
}

}  // namespace countflow
