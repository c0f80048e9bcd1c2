#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace udpcert {

struct TrialRecord;

// Comma-separated decimal numbers, one matrix row per line, optional single
// header line. Parsing is locale-independent and accepts scientific notation.
Eigen::MatrixXd read_csv_matrix(const std::string& path, bool skip_header = false);

// A single-column or single-row CSV read as a vector.
Eigen::VectorXd read_csv_vector(const std::string& path, bool skip_header = false);

void write_trials_csv(const std::string& path,
                      const std::vector<TrialRecord>& trials);

}  // namespace udpcert
