#include "countflow/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace countflow {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim spaces and a stray carriage return.
    std::size_t a = cell.find_first_not_of(" \t\r");
    std::size_t b = cell.find_last_not_of(" \t\r");
    cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

struct RawCsv {
  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> rows;
};

RawCsv read_raw_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  RawCsv raw;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  raw.labels = split_csv_line(line);
  if (raw.labels.empty()) throw std::runtime_error(path + ": empty header");
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != raw.labels.size()) {
      throw std::runtime_error(path + ": row " + std::to_string(raw.rows.size() + 1) +
                               " has " + std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(raw.labels.size()));
    }
    raw.rows.push_back(std::move(cells));
  }
  return raw;
}

double parse_real(const std::string& s, const std::string& path, std::size_t row,
                  const std::string& label) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw std::runtime_error(path + ": row " + std::to_string(row + 1) + ", column '" +
                             label + "': '" + s + "' is not a finite number");
  }
  return v;
}

}  // namespace

CountSeries read_counts_csv(const std::string& path) {
  const RawCsv raw = read_raw_csv(path);
  CountSeries y;
  y.labels = raw.labels;
  y.values.resize(static_cast<Eigen::Index>(raw.rows.size()),
                  static_cast<Eigen::Index>(raw.labels.size()));
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    for (std::size_t j = 0; j < raw.labels.size(); ++j) {
      const double v = parse_real(raw.rows[i][j], path, i, raw.labels[j]);
      if (v < 0.0 || v != std::floor(v) || v > 9.007199254740992e15) {
        throw std::runtime_error(path + ": row " + std::to_string(i + 1) + ", column '" +
                                 raw.labels[j] + "': '" + raw.rows[i][j] +
                                 "' is not a nonnegative integer count");
      }
      y.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return y;
}

Eigen::MatrixXd read_matrix_csv(const std::string& path, std::vector<std::string>* labels) {
  const RawCsv raw = read_raw_csv(path);
  if (labels != nullptr) *labels = raw.labels;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(raw.rows.size()),
                    static_cast<Eigen::Index>(raw.labels.size()));
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    for (std::size_t j = 0; j < raw.labels.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_real(raw.rows[i][j], path, i, raw.labels[j]);
    }
  }
  return m;
}

std::string format_double(double v) {
  // 17 significant digits round-trip; trailing format is stable across
  // runs because it never depends on locale.
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_counts_csv(const std::string& path, const CountSeries& y) {
  y.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const auto labels = y.labels.empty() ? default_labels(y.p()) : y.labels;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    out << (j ? "," : "") << labels[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < y.n(); ++i) {
    for (Eigen::Index j = 0; j < y.p(); ++j) {
      if (j) out << ',';
      out << static_cast<long long>(y.values(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != m.cols()) {
    throw std::invalid_argument("write_matrix_csv: label count mismatch");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    out << (j ? "," : "") << labels[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace countflow
