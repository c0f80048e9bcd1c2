#include "udpcert/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "udpcert/harness.hpp"

namespace udpcert {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_number(const std::string& field, long line_no, std::size_t col) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || begin == end) {
    throw std::invalid_argument("csv: unparsable number '" + field + "' at line " +
                                std::to_string(line_no) + ", column " +
                                std::to_string(col + 1));
  }
  return value;
}

}  // namespace

Eigen::MatrixXd read_csv_matrix(const std::string& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("csv: cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_header && line_no == 1) continue;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      row.push_back(parse_number(fields[c], line_no, c));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("csv: ragged row at line " + std::to_string(line_no) +
                                  " in '" + path + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("csv: no data in '" + path + "'");

  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Eigen::VectorXd read_csv_vector(const std::string& path, bool skip_header) {
  const Eigen::MatrixXd m = read_csv_matrix(path, skip_header);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw std::invalid_argument("csv: '" + path + "' is not a single row or column");
}

void write_trials_csv(const std::string& path,
                      const std::vector<TrialRecord>& trials) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write '" + path + "'");
  out << "seed,noise_event_held,l1_error,pred_error,bound_l1,bound_pred,"
         "violated,appendix_diag_ok\n";
  std::ostringstream buffer;
  buffer.precision(17);
  for (const TrialRecord& rec : trials) {
    buffer.str("");
    buffer << rec.seed << ',' << (rec.noise_event_held ? 1 : 0) << ','
           << rec.l1_error << ',' << rec.pred_error << ',' << rec.bound_l1 << ','
           << rec.bound_pred << ',' << (rec.violated ? 1 : 0) << ','
           << (rec.appendix_diag_ok ? 1 : 0) << '\n';
    out << buffer.str();
  }
}

}  // namespace udpcert
