#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "druin/errors.hpp"

namespace druin {

/// Rows keyed by u, one column per method (missing cells are NaN), plus
/// free-form metadata. CSV carries 5 decimals, JSON full precision.
class ResultTable {
 public:
  using Json = nlohmann::ordered_json;

  ResultTable() = default;
  explicit ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::size_t>& us() const { return us_; }
  std::size_t rows() const { return us_.size(); }
  Json& meta() { return meta_; }
  const Json& meta() const { return meta_; }

  bool has_column(const std::string& name) const { return index_of(name).has_value(); }

  void add_column(const std::string& name) {
    if (has_column(name)) throw DomainError("ResultTable: duplicate column " + name);
    columns_.push_back(name);
    for (auto& r : cells_) r.push_back(kMissing);
  }

  /// Appends a row for u with all cells missing and returns its index.
  std::size_t add_row(std::size_t u) {
    us_.push_back(u);
    cells_.emplace_back(columns_.size(), kMissing);
    return us_.size() - 1;
  }

  void set(std::size_t row, const std::string& column, double v) { cells_.at(row).at(require(column)) = v; }

  double get(std::size_t row, const std::string& column) const { return cells_.at(row).at(require(column)); }

  std::vector<double> column(const std::string& name) const {
    const std::size_t c = require(name);
    std::vector<double> out;
    out.reserve(cells_.size());
    for (const auto& r : cells_) out.push_back(r[c]);
    return out;
  }

  std::string to_csv() const {
    std::string out = "u";
    for (const auto& c : columns_) out += "," + c;
    out += "\n";
    for (std::size_t i = 0; i < us_.size(); ++i) {
      out += std::to_string(us_[i]);
      for (double v : cells_[i]) out += "," + format_fixed(v);
      out += "\n";
    }
    return out;
  }

  Json to_json() const {
    Json rows = Json::array();
    for (std::size_t i = 0; i < us_.size(); ++i) {
      Json row;
      row["u"] = us_[i];
      for (std::size_t c = 0; c < columns_.size(); ++c) {
        const double v = cells_[i][c];
        row[columns_[c]] = std::isnan(v) ? Json(nullptr) : Json(v);
      }
      rows.push_back(std::move(row));
    }
    Json out;
    out["meta"] = meta_.is_null() ? Json::object() : meta_;
    out["rows"] = std::move(rows);
    return out;
  }

  std::string to_json_text() const { return to_json().dump(2) + "\n"; }

  static ResultTable from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DomainError("ResultTable: empty CSV");
    auto header = split(line);
    if (header.empty() || header[0] != "u") throw DomainError("ResultTable: CSV must start with a u column");
    header.erase(header.begin());
    ResultTable t(header);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto cells = split(line);
      if (cells.size() != header.size() + 1) {
        throw DomainError("ResultTable: wrong number of cells on CSV line " + std::to_string(line_no));
      }
      const std::size_t row = t.add_row(parse_index(cells[0], line_no));
      for (std::size_t c = 0; c < header.size(); ++c) {
        t.cells_[row][c] = cells[c + 1].empty() ? kMissing : parse_number(cells[c + 1], line_no);
      }
    }
    return t;
  }

  static ResultTable from_json(const Json& j) {
    if (!j.is_object() || !j.contains("rows")) throw DomainError("ResultTable: JSON needs a rows array");
    ResultTable t;
    if (j.contains("meta")) t.meta_ = j.at("meta");
    for (const auto& row : j.at("rows")) {
      for (auto it = row.begin(); it != row.end(); ++it) {
        if (it.key() != "u" && !t.has_column(it.key())) t.add_column(it.key());
      }
    }
    for (const auto& row : j.at("rows")) {
      const std::size_t r = t.add_row(row.at("u").get<std::size_t>());
      for (auto it = row.begin(); it != row.end(); ++it) {
        if (it.key() == "u" || it->is_null()) continue;
        t.set(r, it.key(), it->get<double>());
      }
    }
    return t;
  }

  static ResultTable from_json_text(const std::string& text) {
    try {
      return from_json(Json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(std::string("ResultTable: bad JSON: ") + e.what());
    }
  }

  /// Fixed 5-decimal rendering; missing values are empty cells.
  static std::string format_fixed(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5f", v);
    std::string s = buf;
    if (s == "-0.00000") s = "0.00000";
    return s;
  }

  /// Cell-by-cell equality with NaN == NaN.
  bool same_cells(const ResultTable& o) const {
    if (columns_ != o.columns_ || us_ != o.us_) return false;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      for (std::size_t c = 0; c < columns_.size(); ++c) {
        const double a = cells_[i][c], b = o.cells_[i][c];
        if (!(a == b || (std::isnan(a) && std::isnan(b)))) return false;
      }
    }
    return true;
  }

  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

 private:
  std::optional<std::size_t> index_of(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i] == name) return i;
    }
    return std::nullopt;
  }

  std::size_t require(const std::string& name) const {
    const auto i = index_of(name);
    if (!i) throw DomainError("ResultTable: no column " + name);
    return *i;
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    out.push_back(cur);
    return out;
  }

  static double parse_number(const std::string& s, std::size_t line_no) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw DomainError("ResultTable: bad number '" + s + "' on CSV line " + std::to_string(line_no));
    }
  }

  static std::size_t parse_index(const std::string& s, std::size_t line_no) {
    const double v = parse_number(s, line_no);
    if (!(v >= 0.0) || v != std::floor(v)) {
      throw DomainError("ResultTable: u must be a nonnegative integer on CSV line " + std::to_string(line_no));
    }
    return static_cast<std::size_t>(v);
  }

  std::vector<std::string> columns_;
  std::vector<std::size_t> us_;
  std::vector<std::vector<double>> cells_;
  Json meta_ = Json::object();
};

}  // namespace druin
