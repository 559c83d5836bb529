#pragma once

// Similarity graph construction: Pearson correlation between samples,
// negative-weight policies and optional k-NN sparsification.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "transduct/core.hpp"
#include "transduct/parallel.hpp"

namespace transduct {

enum class NegativeHandling { Clamp, Shift };

inline std::string to_string(NegativeHandling mode) { return mode == NegativeHandling::Clamp ? "clamp" : "shift"; }

inline NegativeHandling parse_negative_handling(const std::string& s) {
  if (s == "clamp") return NegativeHandling::Clamp;
  if (s == "shift") return NegativeHandling::Shift;
  throw ConfigError("unknown negative handling '" + s + "' (expected clamp or shift)");
}

struct PearsonResult {
  SimilarityMatrix w;
  /// Samples with zero variance across their features; their similarity to
  /// every other sample is 0.
  std::vector<std::size_t> zero_variance;
};

/// Pairwise Pearson correlation of the sample rows, zero diagonal.
///
/// Each row is centered and scaled to unit Euclidean norm once; the
/// correlation of two samples is then the dot product of their standardized
/// rows. Population and sample normalizations cancel in the ratio. Entries
/// are clipped to [-1, 1] to absorb rounding.
inline PearsonResult pearson_matrix(const FeatureSet& features) {
  const std::size_t n = features.size();
  const std::size_t d = features.dim();
  if (n < 2) throw InsufficientSamples("pearson_matrix: need at least 2 samples");
  if (d < 2) throw ConfigError("pearson_matrix: need at least 2 feature dimensions");

  const Matrix& phi = features.data();
  Matrix z(n, d);
  std::vector<char> degenerate(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = phi.row(i);
    double mean = 0.0;
    double scale = 0.0;
    for (double v : src) {
      mean += v;
      scale = std::max(scale, std::abs(v));
    }
    mean /= static_cast<double>(d);
    double ss = 0.0;
    auto dst = z.row(i);
    for (std::size_t k = 0; k < d; ++k) {
      dst[k] = src[k] - mean;
      ss += dst[k] * dst[k];
    }
    // Rounding residue of a constant row is a few ulps of its magnitude.
    double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    if (ss <= static_cast<double>(d) * floor * floor) {
      degenerate[i] = 1;
      std::fill(dst.begin(), dst.end(), 0.0);
      continue;
    }
    double inv = 1.0 / std::sqrt(ss);
    for (double& v : dst) v *= inv;
  }

  Matrix w(n, n);
  parallel_for(n, [&](std::size_t i) {
    if (degenerate[i]) return;
    auto zi = z.row(i);
    auto out = w.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || degenerate[j]) continue;
      auto zj = z.row(j);
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += zi[k] * zj[k];
      out[j] = std::clamp(dot, -1.0, 1.0);
    }
  });

  std::vector<std::size_t> flagged;
  for (std::size_t i = 0; i < n; ++i)
    if (degenerate[i]) flagged.push_back(i);
  return {SimilarityMatrix(std::move(w)), std::move(flagged)};
}

/// Maps a possibly signed similarity matrix into the non-negative regime.
/// Clamp zeroes negative entries; Shift subtracts the most negative
/// off-diagonal entry from every entry and re-zeroes the diagonal.
inline SimilarityMatrix handle_negatives(const SimilarityMatrix& w, NegativeHandling mode) {
  Matrix out = w.matrix();
  const std::size_t n = out.rows();
  if (mode == NegativeHandling::Clamp) {
    for (double& v : out.values()) v = std::max(v, 0.0);
    return SimilarityMatrix(std::move(out));
  }
  double lowest = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) lowest = std::min(lowest, out(i, j));
  if (lowest < 0.0) {
    for (double& v : out.values()) v -= lowest;
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 0.0;
  }
  return SimilarityMatrix(std::move(out));
}

/// Keeps the k largest off-diagonal entries of every row (lower column wins
/// ties), then symmetrizes with the element-wise maximum.
inline SimilarityMatrix sparsify_knn(const SimilarityMatrix& w, std::size_t k) {
  const std::size_t n = w.size();
  if (k < 1 || k >= n) throw ConfigError("sparsify_knn: need 1 <= k < n");
  Matrix kept(n, n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    auto row = w.row(i);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
    for (std::size_t r = 0; r < k; ++r) kept(i, order[r]) = row[order[r]];
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = std::max(kept(i, j), kept(j, i));
  return SimilarityMatrix(std::move(out));
}

}  // namespace transduct
