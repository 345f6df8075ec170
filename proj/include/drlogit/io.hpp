#pragma once

#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "drlogit/simulate.hpp"
#include "drlogit/types.hpp"

namespace drlogit {

// Raised for malformed input files; carries a message naming row/column.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace io_detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_cell(const std::string& cell, std::size_t row,
                         const std::string& column) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' ||
                         *(end - 1) == '\r'))
    --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ValidationError("non-numeric cell at row " + std::to_string(row) +
                          ", column '" + column + "'");
  if (!std::isfinite(value))
    throw ValidationError("non-finite cell at row " + std::to_string(row) +
                          ", column '" + column + "'");
  return value;
}

}  // namespace io_detail

// Strict CSV ingestion: header required, '.' decimals, no missing values.
// Data rows are 1-indexed in error messages.
inline Dataset read_csv_dataset(const std::string& path,
                                const std::string& outcome,
                                const std::string& exposure) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = io_detail::split_csv_line(line);
  std::ptrdiff_t y_col = -1, a_col = -1;
  std::vector<std::size_t> x_cols;
  std::vector<std::string> x_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == outcome)
      y_col = static_cast<std::ptrdiff_t>(c);
    else if (header[c] == exposure)
      a_col = static_cast<std::ptrdiff_t>(c);
    else {
      x_cols.push_back(c);
      x_names.push_back(header[c]);
    }
  }
  if (y_col < 0) throw ValidationError("outcome column '" + outcome + "' missing");
  if (a_col < 0)
    throw ValidationError("exposure column '" + exposure + "' missing");

  std::vector<double> ys, as;
  std::vector<std::vector<double>> xs;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto fields = io_detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw ValidationError("row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
    const double y = io_detail::parse_cell(
        fields[static_cast<std::size_t>(y_col)], row, outcome);
    if (y != 0.0 && y != 1.0)
      throw ValidationError("outcome not in {0,1} at row " +
                            std::to_string(row));
    ys.push_back(y);
    as.push_back(io_detail::parse_cell(fields[static_cast<std::size_t>(a_col)],
                                       row, exposure));
    std::vector<double> xrow;
    xrow.reserve(x_cols.size());
    for (std::size_t j = 0; j < x_cols.size(); ++j)
      xrow.push_back(io_detail::parse_cell(fields[x_cols[j]], row, x_names[j]));
    xs.push_back(std::move(xrow));
  }
  if (ys.empty()) throw ValidationError("no data rows");

  Dataset data;
  const Eigen::Index n = static_cast<Eigen::Index>(ys.size());
  const Eigen::Index p = static_cast<Eigen::Index>(x_cols.size());
  data.y.resize(n);
  data.a.resize(n);
  data.x.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.y[i] = ys[static_cast<std::size_t>(i)];
    data.a[i] = as[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j)
      data.x(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  data.column_names = x_names;
  try {
    data.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  return data;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv_dataset(const Dataset& data, const std::string& path,
                              const std::string& outcome = "y",
                              const std::string& exposure = "a") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << outcome << ',' << exposure;
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    if (!data.column_names.empty())
      out << ',' << data.column_names[static_cast<std::size_t>(j)];
    else
      out << ",x" << (j + 1);
  }
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << static_cast<int>(data.y[i]) << ',' << format_double(data.a[i]);
    for (Eigen::Index j = 0; j < data.p(); ++j)
      out << ',' << format_double(data.x(i, j));
    out << '\n';
  }
}

inline nlohmann::json report_to_json(const EstimateReport& rep,
                                     Eigen::Index n, Eigen::Index p) {
  nlohmann::json j;
  j["schema_version"] = "1";
  j["beta_hat"] = rep.beta_hat;
  j["se"] = rep.se;
  j["ci_lower"] = rep.ci_lower;
  j["ci_upper"] = rep.ci_upper;
  j["level"] = rep.level;
  j["method"] = method_name(rep.method);
  j["converged"] = rep.converged;
  j["n"] = n;
  j["p"] = p;
  j["diagnostics"] = rep.diagnostics;
  return j;
}

inline void write_monte_carlo_csv(const MonteCarloResult& result,
                                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "replicate,n,beta_hat,se,covered,failed\n";
  for (const auto& row : result.rows)
    out << row.replicate << ',' << row.n << ',' << format_double(row.beta_hat)
        << ',' << format_double(row.se) << ',' << (row.covered ? 1 : 0) << ','
        << (row.failed ? 1 : 0) << '\n';
}

inline nlohmann::json monte_carlo_summary_json(const MonteCarloResult& result,
                                               Scenario scenario) {
  nlohmann::json j;
  j["schema_version"] = "1";
  j["scenario"] = scenario_name(scenario);
  j["validity_guaranteed"] = scenario != Scenario::both_wrong;
  nlohmann::json per_n = nlohmann::json::array();
  for (const auto& s : result.summaries) {
    nlohmann::json row;
    row["n"] = s.n;
    row["replicates"] = s.replicates;
    row["beta0"] = s.beta0;
    row["bias"] = s.bias;
    row["mc_sd"] = s.mc_sd;
    row["mean_se"] = s.mean_se;
    row["coverage"] = s.coverage;
    row["failure_rate"] = s.failure_rate;
    per_n.push_back(row);
  }
  j["per_n"] = per_n;
  if (!result.summaries.empty())
    j["coverage"] = result.summaries.front().coverage;
  return j;
}

}  // namespace drlogit
