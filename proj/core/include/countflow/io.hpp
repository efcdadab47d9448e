#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "countflow/types.hpp"

namespace countflow {

// Counts CSV: UTF-8, comma separated, one header row of column labels,
// then one row per time point of nonnegative integers. Errors name the
// offending cell. Ragged rows are rejected.
CountSeries read_counts_csv(const std::string& path);

// Same layout but real-valued cells (residuals, intensities, ...).
Eigen::MatrixXd read_matrix_csv(const std::string& path,
                                std::vector<std::string>* labels = nullptr);

void write_counts_csv(const std::string& path, const CountSeries& y);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& labels);

// Shortest round-trip decimal form; used everywhere a double is
// printed so that equal runs produce byte-identical files.
std::string format_double(double v);

}  // namespace countflow
