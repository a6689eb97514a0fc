#pragma once

// Observation matrices, label vectors, CSV ingestion, standardization and
// two-component Gaussian mixture sampling (with the G1/G2/G3 presets).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cforest/core.hpp"

namespace cforest {

struct FeatureKind {
  enum class Type { numeric, categorical };
  Type type = Type::numeric;
  int num_levels = 0;  // categorical only

  static FeatureKind numeric() { return {}; }
  static FeatureKind categorical(int levels) { return {Type::categorical, levels}; }
  bool is_categorical() const { return type == Type::categorical; }
  bool operator==(const FeatureKind&) const = default;
};

/// n×p observation matrix. Immutable once built; validated on construction.
class DataMatrix {
 public:
  DataMatrix() = default;

  explicit DataMatrix(Matrix values, std::vector<FeatureKind> kinds = {},
                      std::vector<std::string> names = {})
      : values_(std::move(values)), kinds_(std::move(kinds)), names_(std::move(names)) {
    if (kinds_.empty()) kinds_.assign(static_cast<std::size_t>(values_.cols()), FeatureKind::numeric());
    validate();
  }

  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }
  const Matrix& values() const { return values_; }
  double operator()(int i, int j) const { return values_(i, j); }
  const std::vector<FeatureKind>& kinds() const { return kinds_; }
  const FeatureKind& kind(int j) const { return kinds_[static_cast<std::size_t>(j)]; }
  const std::vector<std::string>& names() const { return names_; }

  /// Same data with rows reordered: row i of the result is row order[i].
  DataMatrix permuted_rows(const std::vector<int>& order) const {
    Matrix v(static_cast<Eigen::Index>(order.size()), values_.cols());
    for (std::size_t i = 0; i < order.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = values_.row(order[i]);
    return DataMatrix(std::move(v), kinds_, names_);
  }

 private:
  void validate() const {
    if (values_.rows() < 2) throw Error(ErrorKind::invalid_input, "data needs at least 2 rows");
    if (values_.cols() < 1) throw Error(ErrorKind::invalid_input, "data needs at least 1 column");
    if (kinds_.size() != static_cast<std::size_t>(values_.cols()))
      throw Error(ErrorKind::length_mismatch, "feature kinds do not match column count");
    if (!names_.empty() && names_.size() != kinds_.size())
      throw Error(ErrorKind::length_mismatch, "feature names do not match column count");
    if (!values_.allFinite()) throw Error(ErrorKind::invalid_input, "data contains non-finite values");
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      const auto& kind = kinds_[static_cast<std::size_t>(j)];
      if (!kind.is_categorical()) continue;
      for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        const double v = values_(i, j);
        if (v != std::floor(v) || v < 0 || v >= kind.num_levels)
          throw Error(ErrorKind::invalid_input,
                      "categorical column " + std::to_string(j) + " has a code outside 0..levels-1");
      }
    }
  }

  Matrix values_;
  std::vector<FeatureKind> kinds_;
  std::vector<std::string> names_;
};

/// Cluster or class labels in 0..num_classes-1.
struct LabelVector {
  std::vector<int> labels;
  int num_classes = 0;

  LabelVector() = default;
  LabelVector(std::vector<int> l, int k) : labels(std::move(l)), num_classes(k) {
    for (int v : labels)
      if (v < 0 || v >= num_classes) throw Error(ErrorKind::invalid_input, "label outside 0..K-1");
  }

  /// Relabels arbitrary integer labels by order of first appearance.
  static LabelVector canonical(const std::vector<int>& raw) {
    std::unordered_map<int, int> code;
    std::vector<int> out;
    out.reserve(raw.size());
    for (int v : raw) {
      auto [it, inserted] = code.emplace(v, static_cast<int>(code.size()));
      out.push_back(it->second);
    }
    return LabelVector(std::move(out), static_cast<int>(code.size()));
  }

  int size() const { return static_cast<int>(labels.size()); }
  int operator[](int i) const { return labels[static_cast<std::size_t>(i)]; }
};

// --- CSV -----------------------------------------------------------------

struct CsvOptions {
  bool has_header = true;
  /// Header name, or a 0-based index (negative counts from the end).
  std::optional<std::string> label_column;
  /// Per-column overrides keyed like label_column.
  std::map<std::string, FeatureKind::Type> kinds;
  bool all_categorical = false;
};

struct LoadedData {
  DataMatrix data;
  std::optional<LabelVector> labels;
};

namespace detail {

// RFC-4180 records: quoted fields, doubled quotes, CRLF or LF line ends.
inline std::vector<std::vector<std::string>> parse_csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false, field_started = false, any = false;
  std::size_t line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    bool blank = row.size() == 1 && row[0].empty();
    if (!blank) rows.push_back(std::move(row));
    row.clear();
  };
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started || !field.empty())
          throw Error(ErrorKind::malformed_input, "stray quote at line " + std::to_string(line));
        in_quotes = true;
        field_started = true;
        break;
      case ',': end_field(); break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        end_row();
        ++line;
        break;
      case '\n':
        end_row();
        ++line;
        break;
      default: field.push_back(c); field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorKind::malformed_input, "unterminated quoted field");
  if (any && (field_started || !field.empty() || !row.empty())) end_row();
  return rows;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline int resolve_column(const std::string& key, const std::vector<std::string>& header, int ncols) {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == key) return static_cast<int>(j);
  int idx = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
  if (ec != std::errc() || ptr != key.data() + key.size())
    throw Error(ErrorKind::invalid_input, "unknown column '" + key + "'");
  if (idx < 0) idx += ncols;
  if (idx < 0 || idx >= ncols) throw Error(ErrorKind::invalid_input, "column index out of range: " + key);
  return idx;
}

}  // namespace detail

/// Parses delimited text. Numeric columns are read as reals; any column with
/// a non-numeric field, or marked categorical, is level-coded in order of
/// first appearance. Missing values (`?` or empty) are rejected.
inline LoadedData parse_csv(std::istream& in, const CsvOptions& opts = {}) {
  auto records = detail::parse_csv_records(in);
  if (records.empty()) throw Error(ErrorKind::empty_input, "no records");
  std::vector<std::string> header;
  if (opts.has_header) {
    header = records.front();
    for (auto& h : header) h = std::string(detail::trim(h));
    records.erase(records.begin());
  }
  if (records.empty()) throw Error(ErrorKind::empty_input, "no data rows");
  const int ncols = static_cast<int>(records.front().size());
  if (!header.empty() && static_cast<int>(header.size()) != ncols)
    throw Error(ErrorKind::malformed_input, "header has " + std::to_string(header.size()) +
                                                " columns but row 1 has " + std::to_string(ncols));
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (static_cast<int>(records[r].size()) != ncols)
      throw Error(ErrorKind::malformed_input, "row " + std::to_string(r + 1) + " has " +
                                                  std::to_string(records[r].size()) + " fields, expected " +
                                                  std::to_string(ncols));
    for (int j = 0; j < ncols; ++j) {
      auto f = detail::trim(records[r][static_cast<std::size_t>(j)]);
      if (f.empty() || f == "?")
        throw Error(ErrorKind::malformed_input,
                    "missing value at row " + std::to_string(r + 1) + ", column " + std::to_string(j));
    }
  }

  std::optional<int> label_col;
  if (opts.label_column) label_col = detail::resolve_column(*opts.label_column, header, ncols);
  std::vector<std::optional<FeatureKind::Type>> forced(static_cast<std::size_t>(ncols));
  for (const auto& [key, type] : opts.kinds)
    forced[static_cast<std::size_t>(detail::resolve_column(key, header, ncols))] = type;

  const Eigen::Index n = static_cast<Eigen::Index>(records.size());
  std::vector<int> feature_cols;
  for (int j = 0; j < ncols; ++j)
    if (!label_col || *label_col != j) feature_cols.push_back(j);
  if (feature_cols.empty()) throw Error(ErrorKind::invalid_input, "no feature columns");

  Matrix values(n, static_cast<Eigen::Index>(feature_cols.size()));
  std::vector<FeatureKind> kinds;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < feature_cols.size(); ++c) {
    const int j = feature_cols[c];
    auto type = forced[static_cast<std::size_t>(j)];
    if (!type && opts.all_categorical) type = FeatureKind::Type::categorical;
    std::vector<double> parsed(static_cast<std::size_t>(n));
    bool numeric = true;
    for (Eigen::Index i = 0; i < n && numeric; ++i) {
      auto v = detail::parse_number(records[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      if (!v) {
        if (type == FeatureKind::Type::numeric)
          throw Error(ErrorKind::malformed_input, "non-numeric value at row " + std::to_string(i + 1) +
                                                      ", column " + std::to_string(j));
        numeric = false;
      } else {
        parsed[static_cast<std::size_t>(i)] = *v;
      }
    }
    if (numeric && type != FeatureKind::Type::categorical) {
      for (Eigen::Index i = 0; i < n; ++i) values(i, static_cast<Eigen::Index>(c)) = parsed[static_cast<std::size_t>(i)];
      kinds.push_back(FeatureKind::numeric());
    } else {
      std::map<std::string, int> code;
      for (Eigen::Index i = 0; i < n; ++i) {
        std::string key(detail::trim(records[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
        auto [it, inserted] = code.emplace(key, static_cast<int>(code.size()));
        values(i, static_cast<Eigen::Index>(c)) = it->second;
      }
      kinds.push_back(FeatureKind::categorical(static_cast<int>(code.size())));
    }
    names.push_back(header.empty() ? "x" + std::to_string(j) : header[static_cast<std::size_t>(j)]);
  }

  LoadedData out{DataMatrix(std::move(values), std::move(kinds), std::move(names)), std::nullopt};
  if (label_col) {
    std::map<std::string, int> code;
    std::vector<int> labels;
    for (const auto& rec : records) {
      std::string key(detail::trim(rec[static_cast<std::size_t>(*label_col)]));
      auto [it, inserted] = code.emplace(key, static_cast<int>(code.size()));
      labels.push_back(it->second);
    }
    out.labels = LabelVector(std::move(labels), static_cast<int>(code.size()));
  }
  return out;
}

inline LoadedData load_csv(const std::string& path, const CsvOptions& opts = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::invalid_input, "cannot open " + path);
  try {
    return parse_csv(in, opts);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + std::string(e.what()));
  }
}

/// Numeric columns to zero mean and unit population standard deviation
/// (divide by n); constant columns become zero; categorical codes untouched.
inline DataMatrix standardize(const DataMatrix& data) {
  Matrix v = data.values();
  const double n = static_cast<double>(v.rows());
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    if (data.kind(static_cast<int>(j)).is_categorical()) continue;
    const double mean = v.col(j).sum() / n;
    v.col(j).array() -= mean;
    const double sd = std::sqrt(v.col(j).squaredNorm() / n);
    if (sd > 0) {
      v.col(j) /= sd;
    } else {
      v.col(j).setZero();
    }
  }
  return DataMatrix(std::move(v), data.kinds(), data.names());
}

// --- Gaussian mixture ----------------------------------------------------

/// π·N(μ, Σ) + (1-π)·N(-μ, Σ).
struct GaussianMixtureSpec {
  Vector mu;
  Matrix sigma;
  double pi = 0.5;

  int dim() const { return static_cast<int>(mu.size()); }
};

struct LabeledData {
  DataMatrix data;
  LabelVector labels;
};

/// Rows i.i.d. from the mixture; label 1 for the +μ component.
inline LabeledData sample_gaussian_mixture(const GaussianMixtureSpec& spec, int n, std::uint64_t seed) {
  const Eigen::Index p = spec.mu.size();
  if (n < 1) throw Error(ErrorKind::invalid_input, "sample size must be positive");
  if (p < 1 || spec.sigma.rows() != p || spec.sigma.cols() != p)
    throw Error(ErrorKind::invalid_spec, "covariance shape does not match mean");
  if (!(spec.pi > 0 && spec.pi < 1)) throw Error(ErrorKind::invalid_spec, "mixing weight outside (0,1)");
  if (!spec.sigma.isApprox(spec.sigma.transpose(), 1e-12))
    throw Error(ErrorKind::invalid_spec, "covariance not symmetric");
  Eigen::LLT<Matrix> llt(spec.sigma);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::invalid_spec, "covariance not positive definite");
  const Matrix L = llt.matrixL();

  Rng rng(seed);
  std::bernoulli_distribution membership(spec.pi);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, p);
  std::vector<int> labels(static_cast<std::size_t>(n));
  Vector z(p);
  for (int i = 0; i < n; ++i) {
    const bool positive = membership(rng);
    for (Eigen::Index j = 0; j < p; ++j) z(j) = normal(rng);
    x.row(i) = ((positive ? spec.mu : Vector(-spec.mu)) + L * z).transpose();
    labels[static_cast<std::size_t>(i)] = positive ? 1 : 0;
  }
  return {DataMatrix(std::move(x)), LabelVector(std::move(labels), 2)};
}

/// G1: μ = (0,0,0,1,2,...,100), unit diagonal, off-diagonals i.i.d. U[0,0.5]
/// shifted by the smallest λI that lifts the minimum eigenvalue to 0.01.
inline GaussianMixtureSpec preset_g1(std::uint64_t seed = 1) {
  constexpr int leading_zeros = 3;
  constexpr int informative = 100;
  const int p = leading_zeros + informative;
  GaussianMixtureSpec spec;
  spec.mu = Vector::Zero(p);
  for (int i = 0; i < informative; ++i) spec.mu(leading_zeros + i) = i + 1;
  Rng rng(seed);
  std::uniform_real_distribution<double> off(0.0, 0.5);
  spec.sigma = Matrix::Identity(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) spec.sigma(i, j) = spec.sigma(j, i) = off(rng);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spec.sigma, Eigen::EigenvaluesOnly);
  const double shift = std::max(0.0, 0.01 - eig.eigenvalues().minCoeff());
  spec.sigma.diagonal().array() += shift;
  return spec;
}

/// G2: 100 noise coordinates then 20 drawn i.i.d. from U[0,1]; Σ = I.
inline GaussianMixtureSpec preset_g2(std::uint64_t seed = 1) {
  GaussianMixtureSpec spec;
  spec.mu = Vector::Zero(120);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 100; i < 120; ++i) spec.mu(i) = u(rng);
  spec.sigma = Matrix::Identity(120, 120);
  return spec;
}

/// G3: 1000 noise coordinates then 1,2,...,20; Σ = I.
inline GaussianMixtureSpec preset_g3() {
  GaussianMixtureSpec spec;
  spec.mu = Vector::Zero(1020);
  for (int i = 0; i < 20; ++i) spec.mu(1000 + i) = i + 1;
  spec.sigma = Matrix::Identity(1020, 1020);
  return spec;
}

}  // namespace cforest
