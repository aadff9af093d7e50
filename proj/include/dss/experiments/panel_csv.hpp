#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dss/error.hpp"
#include "dss/types.hpp"

namespace dss::experiments {

struct PanelOptions {
  /// Name of the response column.
  std::string target = "y";
  /// Treat the first column as a date/identifier and skip it in the math.
  bool has_date_column = true;
  /// Center and scale every column (response included) to mean 0, sd 1.
  bool standardize = false;
};

/// Per-column affine transform z = (v − mean)/sd.
struct Standardization {
  double response_mean = 0.0;
  double response_sd = 1.0;
  Eigen::VectorXd design_mean;
  Eigen::VectorXd design_sd;

  [[nodiscard]] Dataset inverse(const Dataset& scaled) const {
    Dataset out = scaled;
    out.responses = scaled.responses.array() * response_sd + response_mean;
    out.design = (scaled.design.array().rowwise() * design_sd.transpose().array()).rowwise() +
                 design_mean.transpose().array();
    return out;
  }
};

struct Panel {
  Dataset data;
  std::vector<std::string> row_ids;
  std::optional<Standardization> transform;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Scales a column in place; constant columns keep sd = 1.
inline std::pair<double, double> standardize_column(Eigen::Ref<Eigen::VectorXd> v) {
  const double mean = v.mean();
  const double var = v.size() > 1 ? (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1) : 0.0;
  const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
  v = (v.array() - mean) / sd;
  return {mean, sd};
}

}  // namespace detail

/// Reads a rectangular numeric panel with a header row. Errors name the
/// offending file row (header = row 1) and column (1-based).
inline Panel parse_panel_csv(std::istream& in, const PanelOptions& opt = {}) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("panel csv: empty input");
  const std::vector<std::string> header = detail::split_csv_line(line);
  const std::size_t first_value = opt.has_date_column ? 1 : 0;
  if (header.size() <= first_value) throw DataError("panel csv: header has no value columns");

  std::optional<std::size_t> target;
  for (std::size_t c = first_value; c < header.size(); ++c)
    if (detail::trim(header[c]) == opt.target) target = c;
  if (!target) throw DataError("panel csv: target column '" + opt.target + "' not found in header");

  Panel panel;
  for (std::size_t c = first_value; c < header.size(); ++c)
    if (c != *target) panel.data.column_names.emplace_back(detail::trim(header[c]));

  std::vector<std::vector<double>> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("panel csv: row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(header.size()));
    std::vector<double> values;
    values.reserve(cells.size() - first_value);
    for (std::size_t c = first_value; c < cells.size(); ++c) {
      const auto v = detail::parse_double(cells[c]);
      if (!v)
        throw DataError("panel csv: non-numeric cell '" + cells[c] + "' at row " + std::to_string(row_no) +
                        ", column " + std::to_string(c + 1));
      values.push_back(*v);
    }
    panel.row_ids.push_back(opt.has_date_column ? cells[0] : std::to_string(rows.size() + 1));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError("panel csv: no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(header.size() - first_value - 1);
  const std::size_t target_offset = *target - first_value;
  panel.data.responses.resize(n);
  panel.data.design.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < rows[static_cast<std::size_t>(i)].size(); ++c) {
      const double v = rows[static_cast<std::size_t>(i)][c];
      if (c == target_offset)
        panel.data.responses(i) = v;
      else
        panel.data.design(i, col++) = v;
    }
  }

  if (opt.standardize) {
    Standardization s;
    std::tie(s.response_mean, s.response_sd) = detail::standardize_column(panel.data.responses);
    s.design_mean.resize(p);
    s.design_sd.resize(p);
    for (Eigen::Index j = 0; j < p; ++j)
      std::tie(s.design_mean(j), s.design_sd(j)) = detail::standardize_column(panel.data.design.col(j));
    panel.transform = std::move(s);
  }
  return panel;
}

inline Panel load_panel_csv(const std::string& path, const PanelOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("panel csv: cannot open '" + path + "'");
  return parse_panel_csv(in, opt);
}

}  // namespace dss::experiments
