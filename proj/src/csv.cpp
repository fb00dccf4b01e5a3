#include "bqr/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace bqr {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim ASCII whitespace and a possible trailing CR
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("load_csv: row " + std::to_string(row) + ", column '" + column +
                                "': cannot parse '" + cell + "' as a number");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buffer, ptr);
}

Dataset load_csv(const std::string& path, const std::string& response, bool add_intercept) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("load_csv: '" + path + "' is empty");
  const std::vector<std::string> header = split_line(line);
  if (header.empty()) throw std::invalid_argument("load_csv: header row has no columns");

  std::size_t response_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == response) response_col = c;
  }
  if (response_col == header.size()) {
    throw std::invalid_argument("load_csv: response column '" + response + "' not found");
  }

  std::vector<std::vector<double>> rows;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;  // blank line
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("load_csv: row " + std::to_string(row_number) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      values[c] = parse_cell(cells[c], row_number, header[c]);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) {
    throw std::invalid_argument("load_csv: '" + path + "' has a header but no data rows (n = 0)");
  }

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index covariates = static_cast<Eigen::Index>(header.size()) - 1;
  const Eigen::Index p = covariates + (add_intercept ? 1 : 0);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd X(n, p);
  std::vector<std::string> names;
  if (add_intercept) {
    X.col(0).setOnes();
    names.push_back("intercept");
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != response_col) names.push_back(header[c]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index out = add_intercept ? 1 : 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == response_col) {
        y[i] = rows[static_cast<std::size_t>(i)][c];
      } else {
        X(i, out++) = rows[static_cast<std::size_t>(i)][c];
      }
    }
  }
  return make_dataset(std::move(y), std::move(X), std::move(names));
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary: identical bytes on every platform
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << ',';
    out << header[c];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << row[c];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write to '" + path + "' failed");
}

}  // namespace bqr
