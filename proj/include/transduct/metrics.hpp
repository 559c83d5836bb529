#pragma once

// Evaluation metrics: accuracy, macro F1, NMI, Recall@K.

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <vector>

#include "transduct/core.hpp"
#include "transduct/parallel.hpp"

namespace transduct {

namespace detail {

template <typename T>
void check_pair(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) throw LengthMismatch("label vectors differ in length");
  if (a.empty()) throw EmptyInput("label vectors are empty");
}

}  // namespace detail

inline double accuracy(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth) {
  detail::check_pair(pred, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += (pred[i] == truth[i]);
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

/// Unweighted mean of per-class F1 over classes present in pred or truth.
/// A class with P + R = 0 scores 0.
inline double macro_f1(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth, std::size_t m) {
  detail::check_pair(pred, truth);
  std::vector<std::size_t> tp(m, 0), predicted(m, 0), actual(m, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= m || truth[i] >= m) throw OutOfRange("macro_f1: class index out of range");
    ++predicted[pred[i]];
    ++actual[truth[i]];
    if (pred[i] == truth[i]) ++tp[pred[i]];
  }
  double sum = 0.0;
  std::size_t classes = 0;
  for (std::size_t c = 0; c < m; ++c) {
    if (predicted[c] == 0 && actual[c] == 0) continue;
    ++classes;
    double precision = predicted[c] ? static_cast<double>(tp[c]) / static_cast<double>(predicted[c]) : 0.0;
    double recall = actual[c] ? static_cast<double>(tp[c]) / static_cast<double>(actual[c]) : 0.0;
    if (precision + recall > 0.0) sum += 2.0 * precision * recall / (precision + recall);
  }
  return sum / static_cast<double>(classes);
}

namespace detail {

/// Relabels clusters 0, 1, ... in order of first appearance.
inline std::vector<std::size_t> canonical_partition(const std::vector<std::size_t>& a, std::size_t& clusters) {
  std::unordered_map<std::size_t, std::size_t> ids;
  std::vector<std::size_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(a[i], ids.size());
    out[i] = it->second;
  }
  clusters = ids.size();
  return out;
}

}  // namespace detail

/// I(A;B) / sqrt(H(A) H(B)) with natural logs. Identical partitions
/// (including a single cluster on both sides) score exactly 1; otherwise a
/// zero entropy on either side scores 0. Cluster ids are canonicalized first,
/// so relabeling either argument cannot change the result.
inline double nmi(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw LengthMismatch("nmi: partitions differ in length");
  if (a.empty()) throw EmptyInput("nmi: empty partitions");
  std::size_t ka = 0, kb = 0;
  const auto ca = detail::canonical_partition(a, ka);
  const auto cb = detail::canonical_partition(b, kb);
  if (ca == cb) return 1.0;
  if (ka == 1 || kb == 1) return 0.0;

  const double n = static_cast<double>(a.size());
  std::vector<double> joint(ka * kb, 0.0), pa(ka, 0.0), pb(kb, 0.0);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    joint[ca[i] * kb + cb[i]] += 1.0;
    pa[ca[i]] += 1.0;
    pb[cb[i]] += 1.0;
  }
  double ha = 0.0, hb = 0.0, mi = 0.0;
  for (double c : pa) ha -= (c / n) * std::log(c / n);
  for (double c : pb) hb -= (c / n) * std::log(c / n);
  for (std::size_t x = 0; x < ka; ++x)
    for (std::size_t y = 0; y < kb; ++y) {
      double c = joint[x * kb + y];
      if (c == 0.0) continue;
      mi += (c / n) * std::log((c * n) / (pa[x] * pb[y]));
    }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

/// Fraction of queries with a same-class sample among their K nearest
/// neighbours (Euclidean, query excluded, lower index wins distance ties).
inline std::map<std::size_t, double> recall_at_k(const FeatureSet& features, const std::vector<std::size_t>& truth,
                                                 const std::vector<std::size_t>& ks) {
  const std::size_t n = features.size();
  if (truth.size() != n) throw LengthMismatch("recall_at_k: truth length differs from n");
  if (ks.empty()) throw ConfigError("recall_at_k: no K requested");
  const std::size_t kmax = *std::max_element(ks.begin(), ks.end());
  if (*std::min_element(ks.begin(), ks.end()) < 1) throw ConfigError("recall_at_k: K must be >= 1");
  if (n < kmax + 1) throw InsufficientSamples("recall_at_k: need n >= max(K) + 1");

  const Matrix& x = features.data();
  // First same-class rank (1-based) per query; 0 if none within kmax.
  std::vector<std::size_t> first_hit(n, 0);
  parallel_for(n, [&](std::size_t q) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n - 1);
    auto xq = x.row(q);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == q) continue;
      auto xj = x.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < xq.size(); ++k) {
        double d = xq[k] - xj[k];
        s += d * d;
      }
      dist.emplace_back(s, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kmax), dist.end());
    for (std::size_t r = 0; r < kmax; ++r)
      if (truth[dist[r].second] == truth[q]) {
        first_hit[q] = r + 1;
        break;
      }
  }, 32);

  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (std::size_t r : first_hit) hits += (r != 0 && r <= k);
    out[k] = static_cast<double>(hits) / static_cast<double>(n);
  }
  return out;
}

}  // namespace transduct
