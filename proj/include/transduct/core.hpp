#pragma once

// Domain types shared by every module, plus simplex helpers and label
// decoding. Matrices are dense and row-major.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "transduct/errors.hpp"

namespace transduct {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Builds from nested rows; all rows must have the same length.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) throw ShapeMismatch("ragged row " + std::to_string(i));
      std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  bool all_finite() const noexcept {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Largest absolute element-wise difference; shapes must agree.
inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch("max_abs_diff: shapes differ");
  double d = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) d = std::max(d, std::abs(a.values()[k] - b.values()[k]));
  return d;
}

/// Sum of absolute element-wise differences; shapes must agree.
inline double l1_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch("l1_distance: shapes differ");
  double d = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) d += std::abs(a.values()[k] - b.values()[k]);
  return d;
}

/// Per-sample embeddings, one row per sample.
class FeatureSet {
 public:
  FeatureSet(Matrix data, std::vector<std::string> ids) : data_(std::move(data)), ids_(std::move(ids)) {
    if (data_.rows() == 0 || data_.cols() == 0) throw EmptyInput("FeatureSet: need n >= 1 and d >= 1");
    if (ids_.size() != data_.rows()) throw LengthMismatch("FeatureSet: ids and rows differ in count");
    if (!data_.all_finite()) throw NonFinite("FeatureSet: non-finite feature value");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_)
      if (!seen.insert(id).second) throw ConfigError("FeatureSet: duplicate id '" + id + "'");
  }

  /// Features with generated ids "0", "1", ...
  explicit FeatureSet(Matrix data) : FeatureSet(data, default_ids(data.rows())) {}

  const Matrix& data() const noexcept { return data_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return data_.rows(); }
  std::size_t dim() const noexcept { return data_.cols(); }

 private:
  static std::vector<std::string> default_ids(std::size_t n) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    return ids;
  }

  Matrix data_;
  std::vector<std::string> ids_;
};

inline constexpr std::size_t kUnlabeled = std::numeric_limits<std::size_t>::max();

/// Per-sample class indices, or kUnlabeled.
class LabelSet {
 public:
  LabelSet(std::size_t num_classes, std::vector<std::size_t> labels, std::vector<std::string> class_names = {})
      : num_classes_(num_classes), labels_(std::move(labels)), class_names_(std::move(class_names)) {
    if (num_classes_ == 0) throw ConfigError("LabelSet: need at least one class");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] != kUnlabeled && labels_[i] >= num_classes_)
        throw OutOfRange("LabelSet: label of sample " + std::to_string(i) + " out of range");
    if (class_names_.empty())
      for (std::size_t c = 0; c < num_classes_; ++c) class_names_.push_back(std::to_string(c));
    if (class_names_.size() != num_classes_) throw LengthMismatch("LabelSet: class name count differs from m");
  }

  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t operator[](std::size_t i) const noexcept { return labels_[i]; }
  bool is_labeled(std::size_t i) const noexcept { return labels_[i] != kUnlabeled; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }

  std::size_t labeled_count() const noexcept {
    std::size_t c = 0;
    for (auto l : labels_) c += (l != kUnlabeled);
    return c;
  }

 private:
  std::size_t num_classes_;
  std::vector<std::size_t> labels_;
  std::vector<std::string> class_names_;
};

struct Anchor {
  std::size_t index;
  std::size_t label;
  friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// Labeled players whose rows are pinned to one-hot vectors.
class AnchorSet {
 public:
  AnchorSet() = default;
  AnchorSet(std::vector<Anchor> entries, std::size_t n, std::size_t m) : entries_(std::move(entries)) {
    std::unordered_set<std::size_t> seen;
    for (const auto& a : entries_) {
      if (a.index >= n) throw OutOfRange("anchor index " + std::to_string(a.index) + " out of range");
      if (a.label >= m) throw OutOfRange("anchor class " + std::to_string(a.label) + " out of range");
      if (!seen.insert(a.index).second) throw ConfigError("duplicate anchor index " + std::to_string(a.index));
    }
  }

  /// Every labeled sample of `labels` becomes an anchor.
  static AnchorSet from_labels(const LabelSet& labels) {
    std::vector<Anchor> entries;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels.is_labeled(i)) entries.push_back({i, labels[i]});
    return AnchorSet(std::move(entries), labels.size(), labels.num_classes());
  }

  const std::vector<Anchor>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::vector<bool> mask(std::size_t n) const {
    std::vector<bool> out(n, false);
    for (const auto& a : entries_) out.at(a.index) = true;
    return out;
  }

 private:
  std::vector<Anchor> entries_;
};

/// Tolerance on row sums for AssignmentMatrix.
inline constexpr double kSimplexTolerance = 1e-9;

/// Row-stochastic n x m matrix of label probabilities.
class AssignmentMatrix {
 public:
  struct Trusted {};

  explicit AssignmentMatrix(Matrix x) : x_(std::move(x)) { validate(x_); }
  /// Skips validation; for kernels whose output is simplex by construction.
  AssignmentMatrix(Matrix x, Trusted) : x_(std::move(x)) {}

  static void validate(const Matrix& x) {
    if (x.rows() == 0 || x.cols() == 0) throw EmptyInput("AssignmentMatrix: empty");
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double sum = 0.0;
      for (double v : x.row(i)) {
        if (!std::isfinite(v)) throw NonFinite("AssignmentMatrix: non-finite entry in row " + std::to_string(i));
        if (v < 0.0 || v > 1.0) throw ConfigError("AssignmentMatrix: entry outside [0,1] in row " + std::to_string(i));
        sum += v;
      }
      if (std::abs(sum - 1.0) > kSimplexTolerance)
        throw ConfigError("AssignmentMatrix: row " + std::to_string(i) + " does not sum to 1");
    }
  }

  const Matrix& matrix() const noexcept { return x_; }
  std::size_t rows() const noexcept { return x_.rows(); }
  std::size_t cols() const noexcept { return x_.cols(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return x_(i, j); }
  std::span<const double> row(std::size_t i) const noexcept { return x_.row(i); }

 private:
  Matrix x_;
};

/// Square pairwise weights with zero diagonal. Entries may be negative until
/// negative handling has been applied.
class SimilarityMatrix {
 public:
  explicit SimilarityMatrix(Matrix w) : w_(std::move(w)) {
    if (w_.rows() != w_.cols()) throw ShapeMismatch("SimilarityMatrix: not square");
    if (w_.rows() == 0) throw EmptyInput("SimilarityMatrix: empty");
    if (!w_.all_finite()) throw NonFinite("SimilarityMatrix: non-finite entry");
    for (std::size_t i = 0; i < w_.rows(); ++i)
      if (w_(i, i) != 0.0) throw ConfigError("SimilarityMatrix: non-zero diagonal at " + std::to_string(i));
  }

  const Matrix& matrix() const noexcept { return w_; }
  std::size_t size() const noexcept { return w_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return w_(i, j); }
  std::span<const double> row(std::size_t i) const noexcept { return w_.row(i); }

  bool is_nonnegative() const noexcept {
    for (double v : w_.values())
      if (v < 0.0) return false;
    return true;
  }

  bool is_symmetric(double tol = 0.0) const noexcept {
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j)
        if (std::abs(w_(i, j) - w_(j, i)) > tol) return false;
    return true;
  }

 private:
  Matrix w_;
};

/// Divides every row by its sum. Throws ZeroRowSum for a row summing to <= 0.
inline AssignmentMatrix row_normalize(Matrix raw) {
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    auto r = raw.row(i);
    double sum = 0.0;
    for (double v : r) {
      if (v < 0.0) throw ConfigError("row_normalize: negative entry in row " + std::to_string(i));
      sum += v;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) throw ZeroRowSum(i);
    for (double& v : r) v /= sum;
  }
  return AssignmentMatrix(std::move(raw));
}

inline std::vector<double> one_hot(std::size_t cls, std::size_t m) {
  if (cls >= m) throw OutOfRange("one_hot: class " + std::to_string(cls) + " >= " + std::to_string(m));
  std::vector<double> v(m, 0.0);
  v[cls] = 1.0;
  return v;
}

/// Index of the largest entry of each row; ties go to the lowest index.
inline std::vector<std::size_t> argmax_rows(const Matrix& x) {
  std::vector<std::size_t> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.size(); ++j)
      if (r[j] > r[best]) best = j;
    out[i] = best;
  }
  return out;
}

inline std::vector<std::size_t> argmax_decode(const AssignmentMatrix& x) { return argmax_rows(x.matrix()); }

}  // namespace transduct
