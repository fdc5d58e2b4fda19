#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "fairsynth/csv.hpp"
#include "fairsynth/error.hpp"

namespace fairsynth {

enum class ColumnKind { Continuous, Discrete };
enum class ColumnRole { Feature, Protected, Target };
enum class Origin : std::uint8_t { Real, Synthetic };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  ColumnRole role = ColumnRole::Feature;

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

/// Ordered column list with role invariants checked on construction.
class DatasetSchema {
 public:
  DatasetSchema() = default;

  explicit DatasetSchema(std::vector<ColumnSchema> columns) : columns_(std::move(columns)) {
    std::set<std::string> seen;
    std::size_t targets = 0;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      const auto& c = columns_[i];
      if (c.name.empty()) throw Error(ErrorCode::InvalidSchema, "column " + std::to_string(i) + " has an empty name");
      if (!seen.insert(c.name).second) throw Error(ErrorCode::InvalidSchema, "duplicate column name '" + c.name + "'");
      if (c.role == ColumnRole::Target) {
        ++targets;
        target_ = i;
        if (c.kind != ColumnKind::Discrete)
          throw Error(ErrorCode::InvalidSchema, "target column '" + c.name + "' must be discrete");
      } else if (c.role == ColumnRole::Protected) {
        if (c.kind != ColumnKind::Discrete)
          throw Error(ErrorCode::InvalidSchema, "protected column '" + c.name + "' must be discrete");
        protected_.push_back(i);
      }
      if (c.kind == ColumnKind::Continuous) ++continuous_;
    }
    if (targets != 1)
      throw Error(ErrorCode::InvalidSchema, "expected exactly one target column, found " + std::to_string(targets));
    if (protected_.empty()) throw Error(ErrorCode::InvalidSchema, "at least one protected column is required");
  }

  const std::vector<ColumnSchema>& columns() const noexcept { return columns_; }
  const ColumnSchema& operator[](std::size_t i) const { return columns_[i]; }
  std::size_t size() const noexcept { return columns_.size(); }
  std::size_t target_index() const noexcept { return target_; }
  const std::vector<std::size_t>& protected_indices() const noexcept { return protected_; }
  std::size_t continuous_count() const noexcept { return continuous_; }
  std::size_t discrete_count() const noexcept { return columns_.size() - continuous_; }
  bool is_discrete(std::size_t i) const { return columns_[i].kind == ColumnKind::Discrete; }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].name == name) return i;
    throw Error(ErrorCode::MissingColumn, name);
  }

  friend bool operator==(const DatasetSchema& a, const DatasetSchema& b) { return a.columns_ == b.columns_; }

 private:
  std::vector<ColumnSchema> columns_;
  std::size_t target_ = 0;
  std::vector<std::size_t> protected_;
  std::size_t continuous_ = 0;
};

/// Row-major matrix of cells. Discrete cells hold category indices.
class RowBatch {
 public:
  RowBatch() = default;
  explicit RowBatch(std::size_t cols) : cols_(cols) {}
  RowBatch(std::size_t cols, std::vector<double> cells) : cols_(cols), cells_(std::move(cells)) {
    if (cols_ == 0 ? !cells_.empty() : cells_.size() % cols_ != 0)
      throw Error(ErrorCode::InvalidArgument, "cell count is not a multiple of the column count");
  }

  std::size_t cols() const noexcept { return cols_; }
  std::size_t rows() const noexcept { return cols_ ? cells_.size() / cols_ : 0; }
  bool empty() const noexcept { return cells_.empty(); }

  std::span<const double> row(std::size_t r) const { return {cells_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {cells_.data() + r * cols_, cols_}; }
  double at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  double& at(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }

  void push_back(std::span<const double> row) {
    if (row.size() != cols_) throw Error(ErrorCode::SchemaMismatch, "row width differs from batch width");
    cells_.insert(cells_.end(), row.begin(), row.end());
  }
  void reserve(std::size_t rows) { cells_.reserve(rows * cols_); }

  const std::vector<double>& cells() const noexcept { return cells_; }

  friend bool operator==(const RowBatch&, const RowBatch&) = default;

 private:
  std::size_t cols_ = 0;
  std::vector<double> cells_;
};

using Dictionaries = std::vector<std::vector<std::string>>;

/// Typed mixed-column table. Immutable once built; all invariants are checked
/// by the constructor.
class Dataset {
 public:
  Dataset() = default;

  Dataset(DatasetSchema schema, Dictionaries categories, RowBatch cells, std::vector<Origin> origin)
      : schema_(std::move(schema)), categories_(std::move(categories)), cells_(std::move(cells)),
        origin_(std::move(origin)) {
    const std::size_t m = schema_.size();
    if (categories_.size() != m) throw Error(ErrorCode::SchemaMismatch, "one dictionary per column is required");
    if (cells_.cols() != m && !(cells_.cols() == 0 && cells_.empty()))
      throw Error(ErrorCode::SchemaMismatch, "cell width differs from schema width");
    if (cells_.cols() == 0) cells_ = RowBatch(m);
    if (origin_.size() != cells_.rows()) throw Error(ErrorCode::SchemaMismatch, "origin tags must cover every row");
    for (std::size_t c = 0; c < m; ++c) {
      const bool discrete = schema_.is_discrete(c);
      if (!discrete && !categories_[c].empty())
        throw Error(ErrorCode::SchemaMismatch, "continuous column '" + schema_[c].name + "' has a dictionary");
      if (discrete && !std::is_sorted(categories_[c].begin(), categories_[c].end()))
        throw Error(ErrorCode::SchemaMismatch, "dictionary of '" + schema_[c].name + "' is not sorted");
    }
    if (categories_[schema_.target_index()].size() != 2)
      throw Error(ErrorCode::TargetNotBinary, "target '" + schema_[schema_.target_index()].name + "' has " +
                                                  std::to_string(categories_[schema_.target_index()].size()) +
                                                  " categories");
    for (std::size_t r = 0; r < cells_.rows(); ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        const double v = cells_.at(r, c);
        if (!std::isfinite(v))
          throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(r) + " column '" + schema_[c].name +
                                                     "' is not finite");
        if (schema_.is_discrete(c) &&
            (v < 0 || v != std::floor(v) || static_cast<std::size_t>(v) >= categories_[c].size()))
          throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(r) + " column '" + schema_[c].name +
                                                     "' is not a valid category index");
      }
    }
  }

  const DatasetSchema& schema() const noexcept { return schema_; }
  const Dictionaries& dictionaries() const noexcept { return categories_; }
  const std::vector<std::string>& categories(std::size_t c) const { return categories_[c]; }
  std::size_t category_count(std::size_t c) const { return categories_[c].size(); }

  std::size_t rows() const noexcept { return cells_.rows(); }
  std::size_t cols() const noexcept { return schema_.size(); }
  double at(std::size_t r, std::size_t c) const { return cells_.at(r, c); }
  std::span<const double> row(std::size_t r) const { return cells_.row(r); }
  const RowBatch& cells() const noexcept { return cells_; }
  Origin origin(std::size_t r) const { return origin_[r]; }
  const std::vector<Origin>& origins() const noexcept { return origin_; }

  int label(std::size_t r) const { return static_cast<int>(cells_.at(r, schema_.target_index())); }

  std::vector<std::uint32_t> protected_tuple(std::size_t r) const {
    std::vector<std::uint32_t> t;
    t.reserve(schema_.protected_indices().size());
    for (auto c : schema_.protected_indices()) t.push_back(static_cast<std::uint32_t>(cells_.at(r, c)));
    return t;
  }

  /// Rows in the given order; dictionaries are carried over unchanged.
  Dataset select(std::span<const std::size_t> rows) const {
    RowBatch out(cols());
    out.reserve(rows.size());
    std::vector<Origin> origin;
    origin.reserve(rows.size());
    for (auto r : rows) {
      out.push_back(cells_.row(r));
      origin.push_back(origin_[r]);
    }
    return Dataset(schema_, categories_, std::move(out), std::move(origin));
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  DatasetSchema schema_;
  Dictionaries categories_;
  RowBatch cells_;
  std::vector<Origin> origin_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline bool is_missing(std::string_view s) { return s.empty() || s == "?" || s == "NA" || s == "N/A"; }

inline std::string cell_ref(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

}  // namespace detail

/// Builds a Dataset from parsed CSV records (first record is the header).
/// Rows are numbered from 1 in error messages, counting data rows only.
/// When `frozen` is given its dictionaries are used verbatim and any value
/// outside them raises UnseenCategory.
inline Dataset from_records(const std::vector<csv::Record>& records, const DatasetSchema& schema,
                            const Dictionaries* frozen = nullptr) {
  if (records.empty()) throw Error(ErrorCode::MissingColumn, "input has no header row");
  const auto& header = records.front();
  const std::size_t m = schema.size();
  std::vector<std::size_t> source(m);
  for (std::size_t c = 0; c < m; ++c) {
    auto it = std::find(header.begin(), header.end(), schema[c].name);
    if (it == header.end()) {
      // tolerate padding around header names
      it = std::find_if(header.begin(), header.end(),
                        [&](const std::string& h) { return detail::trim(h) == schema[c].name; });
      if (it == header.end()) throw Error(ErrorCode::MissingColumn, schema[c].name);
    }
    source[c] = static_cast<std::size_t>(it - header.begin());
  }
  if (frozen && frozen->size() != m) throw Error(ErrorCode::SchemaMismatch, "frozen dictionaries do not match schema");

  const std::size_t n = records.size() - 1;
  std::vector<std::vector<std::string_view>> raw(m, std::vector<std::string_view>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    for (std::size_t c = 0; c < m; ++c) {
      if (source[c] >= rec.size()) throw Error(ErrorCode::MissingValue, detail::cell_ref(r + 1, schema[c].name));
      auto v = detail::trim(rec[source[c]]);
      if (detail::is_missing(v)) throw Error(ErrorCode::MissingValue, detail::cell_ref(r + 1, schema[c].name));
      raw[c][r] = v;
    }
  }

  Dictionaries dict(m);
  std::vector<double> cells(n * m);
  for (std::size_t c = 0; c < m; ++c) {
    if (!schema.is_discrete(c)) {
      for (std::size_t r = 0; r < n; ++r) {
        auto v = raw[c][r];
        double x = 0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), x);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x))
          throw Error(ErrorCode::UnparseableCell, detail::cell_ref(r + 1, schema[c].name) + " value '" +
                                                      std::string(v) + "'");
        cells[r * m + c] = x;
      }
      continue;
    }
    if (frozen) {
      dict[c] = (*frozen)[c];
    } else {
      std::set<std::string_view> uniq(raw[c].begin(), raw[c].end());
      dict[c].assign(uniq.begin(), uniq.end());
    }
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t k = 0; k < dict[c].size(); ++k) index.emplace(dict[c][k], k);
    for (std::size_t r = 0; r < n; ++r) {
      auto it = index.find(raw[c][r]);
      if (it == index.end())
        throw Error(ErrorCode::UnseenCategory, detail::cell_ref(r + 1, schema[c].name) + " value '" +
                                                   std::string(raw[c][r]) + "'");
      cells[r * m + c] = static_cast<double>(it->second);
    }
  }
  const std::size_t t = schema.target_index();
  if (dict[t].size() != 2)
    throw Error(ErrorCode::TargetNotBinary,
                "target '" + schema[t].name + "' has " + std::to_string(dict[t].size()) + " observed categories");
  for (auto p : schema.protected_indices())
    if (dict[p].size() < 2)
      throw Error(ErrorCode::InvalidSchema, "protected column '" + schema[p].name + "' has fewer than 2 categories");

  return Dataset(schema, std::move(dict), RowBatch(m, std::move(cells)), std::vector<Origin>(n, Origin::Real));
}

inline Dataset load_csv(const std::string& path, const DatasetSchema& schema, const Dictionaries* frozen = nullptr) {
  return from_records(csv::read_file(path), schema, frozen);
}

inline ColumnKind parse_kind(const std::string& s) {
  if (s == "continuous") return ColumnKind::Continuous;
  if (s == "discrete") return ColumnKind::Discrete;
  throw Error(ErrorCode::InvalidSchema, "unknown kind '" + s + "'");
}

inline ColumnRole parse_role(const std::string& s) {
  if (s == "feature") return ColumnRole::Feature;
  if (s == "protected") return ColumnRole::Protected;
  if (s == "target") return ColumnRole::Target;
  throw Error(ErrorCode::InvalidSchema, "unknown role '" + s + "'");
}

inline std::string to_string(ColumnKind k) { return k == ColumnKind::Continuous ? "continuous" : "discrete"; }

inline std::string to_string(ColumnRole r) {
  switch (r) {
    case ColumnRole::Feature: return "feature";
    case ColumnRole::Protected: return "protected";
    case ColumnRole::Target: return "target";
  }
  return "feature";
}

/// Schema documents are JSON: either {"columns": [...]} or a bare array of
/// {"name", "kind", "role"} objects. "role" defaults to "feature".
inline DatasetSchema parse_schema(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSchema, e.what());
  }
  const nlohmann::json& list = doc.is_object() && doc.contains("columns") ? doc["columns"] : doc;
  if (!list.is_array()) throw Error(ErrorCode::InvalidSchema, "expected an array of columns");
  std::vector<ColumnSchema> cols;
  for (const auto& item : list) {
    if (!item.is_object() || !item.contains("name") || !item.contains("kind"))
      throw Error(ErrorCode::InvalidSchema, "each column needs 'name' and 'kind'");
    ColumnSchema c;
    c.name = item.at("name").get<std::string>();
    c.kind = parse_kind(item.at("kind").get<std::string>());
    c.role = item.contains("role") ? parse_role(item.at("role").get<std::string>()) : ColumnRole::Feature;
    cols.push_back(std::move(c));
  }
  return DatasetSchema(std::move(cols));
}

inline DatasetSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open schema '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str());
}

inline std::string schema_to_json(const DatasetSchema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema.columns())
    cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}, {"role", to_string(c.role)}});
  return nlohmann::json{{"columns", cols}}.dump(2);
}

/// Replaces the protected role assignment: the named columns become
/// protected, previously protected columns not named become features.
inline DatasetSchema with_protected(const DatasetSchema& schema, const std::vector<std::string>& names) {
  auto cols = schema.columns();
  for (auto& c : cols)
    if (c.role == ColumnRole::Protected) c.role = ColumnRole::Feature;
  for (const auto& n : names) {
    auto& c = cols[schema.index_of(n)];
    if (c.role == ColumnRole::Target) throw Error(ErrorCode::InvalidSchema, "target '" + n + "' cannot be protected");
    c.role = ColumnRole::Protected;
  }
  return DatasetSchema(std::move(cols));
}

/// Shortest text that parses back to the same double.
inline std::string format_value(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string cell_text(const Dataset& d, std::size_t r, std::size_t c) {
  const double v = d.at(r, c);
  return d.schema().is_discrete(c) ? d.categories(c)[static_cast<std::size_t>(v)] : format_value(v);
}

/// Writes the schema columns in schema order, optionally followed by an
/// `origin` column holding `real` or `synthetic`.
inline void write_csv(std::ostream& out, const Dataset& d, bool with_origin) {
  csv::Record rec;
  for (const auto& c : d.schema().columns()) rec.push_back(c.name);
  if (with_origin) rec.push_back("origin");
  csv::write_record(out, rec);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    rec.clear();
    for (std::size_t c = 0; c < d.cols(); ++c) rec.push_back(cell_text(d, r, c));
    if (with_origin) rec.push_back(d.origin(r) == Origin::Real ? "real" : "synthetic");
    csv::write_record(out, rec);
  }
}

}  // namespace fairsynth
