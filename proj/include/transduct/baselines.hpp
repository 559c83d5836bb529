#pragma once

// Classic graph propagation baselines (label spreading, harmonic function,
// label propagation) and K-means for clustering evaluation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "transduct/core.hpp"

namespace transduct {

struct BaselineConfig {
  double alpha = 0.99;
  std::size_t max_iterations = 1000;
  double tolerance = 1e-8;
  std::size_t kmeans_restarts = 10;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
    if (kmeans_restarts < 1) throw ConfigError("kmeans_restarts must be >= 1");
  }
};

struct PropagationResult {
  /// Decodable simplex rows.
  AssignmentMatrix x;
  /// Raw class scores before row normalization.
  Matrix scores;
  std::size_t iterations_used = 0;
  bool converged = true;
  /// Vertices that could not receive any label mass (degree 0, or no path to
  /// a labeled vertex); their rows are uniform.
  std::vector<std::size_t> isolated;
};

namespace detail {

inline Matrix label_matrix(const LabelSet& labels) {
  Matrix y(labels.size(), labels.num_classes());
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels.is_labeled(i)) y(i, labels[i]) = 1.0;
  return y;
}

inline std::vector<double> degrees(const SimilarityMatrix& w) {
  std::vector<double> deg(w.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (double v : w.row(i)) deg[i] += v;
  return deg;
}

inline void check_inputs(const SimilarityMatrix& w, const LabelSet& labels) {
  if (w.size() != labels.size()) throw ShapeMismatch("similarity and labels differ in n");
  if (!w.is_nonnegative()) throw ConfigError("propagation requires non-negative similarities");
  if (labels.num_classes() < 2) throw ConfigError("propagation requires at least 2 classes");
  if (labels.labeled_count() == 0) throw ConfigError("propagation requires at least one labeled sample");
}

/// Normalizes score rows; all-zero rows become uniform and are reported.
inline AssignmentMatrix normalize_scores(const Matrix& scores, std::vector<std::size_t>& zero_rows) {
  Matrix out(scores.rows(), scores.cols());
  const double uniform = 1.0 / static_cast<double>(scores.cols());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    auto src = scores.row(i);
    auto dst = out.row(i);
    double sum = 0.0;
    for (std::size_t l = 0; l < src.size(); ++l) {
      dst[l] = std::max(src[l], 0.0);
      sum += dst[l];
    }
    if (!(sum > 0.0)) {
      std::fill(dst.begin(), dst.end(), uniform);
      if (std::find(zero_rows.begin(), zero_rows.end(), i) == zero_rows.end()) zero_rows.push_back(i);
      continue;
    }
    for (double& v : dst) v /= sum;
  }
  std::sort(zero_rows.begin(), zero_rows.end());
  return AssignmentMatrix(std::move(out), AssignmentMatrix::Trusted{});
}

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

/// S = D^-1/2 W D^-1/2; rows and columns of degree-0 vertices stay zero.
inline Matrix symmetric_normalized(const SimilarityMatrix& w, std::vector<std::size_t>& isolated) {
  const std::size_t n = w.size();
  std::vector<double> deg = degrees(w);
  std::vector<double> inv_sqrt(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (deg[i] > 0.0)
      inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);
    else
      isolated.push_back(i);
  }
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = inv_sqrt[i] * w(i, j) * inv_sqrt[j];
  return s;
}

}  // namespace detail

/// Zhou et al. label spreading: F <- alpha S F + (1 - alpha) Y from F = Y,
/// until the largest entry change is below the tolerance.
inline PropagationResult label_spreading(const SimilarityMatrix& w, const LabelSet& labels,
                                         const BaselineConfig& cfg) {
  cfg.validate();
  detail::check_inputs(w, labels);
  const std::size_t n = w.size();
  const std::size_t m = labels.num_classes();
  std::vector<std::size_t> zero_degree;
  const Matrix s = detail::symmetric_normalized(w, zero_degree);
  const Matrix y = detail::label_matrix(labels);

  Matrix f = y;
  Matrix next(n, m);
  std::size_t iterations = 0;
  bool converged = false;
  for (std::size_t t = 0; t < cfg.max_iterations; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      auto out = next.row(i);
      for (std::size_t l = 0; l < m; ++l) out[l] = (1.0 - cfg.alpha) * y(i, l);
      for (std::size_t j = 0; j < n; ++j) {
        double sij = cfg.alpha * s(i, j);
        if (sij == 0.0) continue;
        for (std::size_t l = 0; l < m; ++l) out[l] += sij * f(j, l);
      }
    }
    double change = max_abs_diff(next, f);
    std::swap(f, next);
    iterations = t + 1;
    if (change < cfg.tolerance) {
      converged = true;
      break;
    }
  }
  // Degree-0 labeled vertices keep (1 - alpha) Y; only rows left without
  // any label mass are flagged.
  std::vector<std::size_t> zero_rows;
  AssignmentMatrix x = detail::normalize_scores(f, zero_rows);
  return {std::move(x), std::move(f), iterations, converged, std::move(zero_rows)};
}

/// Closed form of label spreading: (1 - alpha) (I - alpha S)^-1 Y.
inline Matrix label_spreading_closed_form(const SimilarityMatrix& w, const LabelSet& labels, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  detail::check_inputs(w, labels);
  const std::size_t n = w.size();
  std::vector<std::size_t> isolated;
  Eigen::MatrixXd s = detail::to_eigen(detail::symmetric_normalized(w, isolated));
  Eigen::MatrixXd y = detail::to_eigen(detail::label_matrix(labels));
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - alpha * s;
  Eigen::MatrixXd f = (1.0 - alpha) * a.partialPivLu().solve(y);
  Matrix out(n, labels.num_classes());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < out.cols(); ++l) out(i, l) = f(i, l);
  return out;
}

namespace detail {

/// Unlabeled vertices with no weighted path to any labeled vertex.
inline std::vector<std::size_t> unreachable_from_labels(const SimilarityMatrix& w, const LabelSet& labels) {
  const std::size_t n = w.size();
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> frontier;
  for (std::size_t i = 0; i < n; ++i)
    if (labels.is_labeled(i)) {
      seen[i] = 1;
      frontier.push(i);
    }
  while (!frontier.empty()) {
    std::size_t i = frontier.front();
    frontier.pop();
    for (std::size_t j = 0; j < n; ++j)
      if (!seen[j] && (w(i, j) > 0.0 || w(j, i) > 0.0)) {
        seen[j] = 1;
        frontier.push(j);
      }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) out.push_back(i);
  return out;
}

}  // namespace detail

/// Iterates F <- D^-1 W F with labeled rows re-clamped each step. Unlabeled
/// rows start uniform. Not converging within max_iterations is reported via
/// `converged`, and the last iterate is returned.
inline PropagationResult label_propagation(const SimilarityMatrix& w, const LabelSet& labels,
                                           const BaselineConfig& cfg) {
  cfg.validate();
  detail::check_inputs(w, labels);
  const std::size_t n = w.size();
  const std::size_t m = labels.num_classes();
  const std::vector<double> deg = detail::degrees(w);
  const double uniform = 1.0 / static_cast<double>(m);

  Matrix f(n, m);
  std::vector<std::size_t> isolated;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels.is_labeled(i))
      f(i, labels[i]) = 1.0;
    else
      for (std::size_t l = 0; l < m; ++l) f(i, l) = uniform;
    if (!labels.is_labeled(i) && !(deg[i] > 0.0)) isolated.push_back(i);
  }

  Matrix next = f;
  std::size_t iterations = 0;
  bool converged = false;
  for (std::size_t t = 0; t < cfg.max_iterations; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (labels.is_labeled(i) || !(deg[i] > 0.0)) continue;
      auto out = next.row(i);
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        double p = w(i, j) / deg[i];
        if (p == 0.0) continue;
        for (std::size_t l = 0; l < m; ++l) out[l] += p * f(j, l);
      }
    }
    double change = max_abs_diff(next, f);
    std::swap(f, next);
    iterations = t + 1;
    if (change < cfg.tolerance) {
      converged = true;
      break;
    }
  }
  AssignmentMatrix x = detail::normalize_scores(f, isolated);
  return {std::move(x), std::move(f), iterations, converged, std::move(isolated)};
}

/// Unlabeled-vertex count above which the harmonic solution is computed
/// iteratively instead of by a dense solve.
inline constexpr std::size_t kHarmonicDirectLimit = 5000;

/// Zhu-Ghahramani-Lafferty harmonic function:
/// f_u = (D_uu - W_uu)^-1 W_ul Y_l, labeled rows one-hot.
/// Throws SingularSystem when some unlabeled vertex cannot reach a label.
inline PropagationResult harmonic_function(const SimilarityMatrix& w, const LabelSet& labels) {
  detail::check_inputs(w, labels);
  const std::size_t n = w.size();
  const std::size_t m = labels.num_classes();
  if (auto lost = detail::unreachable_from_labels(w, labels); !lost.empty())
    throw SingularSystem("harmonic_function: vertex " + std::to_string(lost.front()) +
                         " has no path to a labeled vertex");

  std::vector<std::size_t> unlabeled;
  std::vector<std::size_t> position(n, kUnlabeled);
  for (std::size_t i = 0; i < n; ++i)
    if (!labels.is_labeled(i)) {
      position[i] = unlabeled.size();
      unlabeled.push_back(i);
    }

  if (unlabeled.size() > kHarmonicDirectLimit) {
    BaselineConfig iterative;
    iterative.max_iterations = 100000;
    iterative.tolerance = 1e-12;
    return label_propagation(w, labels, iterative);
  }

  Matrix f = detail::label_matrix(labels);
  const std::size_t u = unlabeled.size();
  if (u > 0) {
    const std::vector<double> deg = detail::degrees(w);
    Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(u, u);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(u, m);
    for (std::size_t a = 0; a < u; ++a) {
      std::size_t i = unlabeled[a];
      laplacian(a, a) = deg[i];
      for (std::size_t j = 0; j < n; ++j) {
        double wij = w(i, j);
        if (wij == 0.0) continue;
        if (labels.is_labeled(j))
          rhs(a, labels[j]) += wij;
        else
          laplacian(a, position[j]) -= wij;
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(laplacian);
    Eigen::MatrixXd fu = lu.solve(rhs);
    if (!fu.allFinite()) throw SingularSystem("harmonic_function: singular Laplacian block");
    for (std::size_t a = 0; a < u; ++a)
      for (std::size_t l = 0; l < m; ++l) f(unlabeled[a], l) = fu(a, l);
  }
  std::vector<std::size_t> zero_rows;
  PropagationResult result{detail::normalize_scores(f, zero_rows), f, 1, true, {}};
  if (!zero_rows.empty()) throw SingularSystem("harmonic_function: unlabeled vertex received no label mass");
  return result;
}

// ---------------------------------------------------------------------------
// K-means

struct KMeansResult {
  std::vector<std::size_t> assignment;
  Matrix centroids;
  double wcss = 0.0;
  /// Within-cluster sum of squares after each Lloyd iteration of the winning
  /// restart, starting with the seeding.
  std::vector<double> wcss_trace;
  std::size_t restart = 0;
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

/// Uniform double in [0, 1) from 53 random bits.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double assign_points(const Matrix& x, const Matrix& centroids, std::vector<std::size_t>& assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      double d = squared_distance(x.row(i), centroids.row(c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignment[i] = best;
    total += best_d;
  }
  return total;
}

inline double wcss_of(const Matrix& x, const Matrix& centroids, const std::vector<std::size_t>& assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) total += squared_distance(x.row(i), centroids.row(assignment[i]));
  return total;
}

inline Matrix kmeanspp_seed(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = x.rows();
  Matrix centroids(k, x.cols());
  std::size_t first = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n));
  std::copy(x.row(first).begin(), x.row(first).end(), centroids.row(0).begin());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(x.row(i), centroids.row(c - 1)));
      total += nearest[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double target = unit_uniform(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n));
    }
    std::copy(x.row(pick).begin(), x.row(pick).end(), centroids.row(c).begin());
  }
  return centroids;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding; best of cfg.kmeans_restarts by
/// WCSS (earlier restart wins ties). Empty clusters are re-seeded with the
/// point farthest from its current centroid.
inline KMeansResult kmeans(const FeatureSet& features, std::size_t k, const BaselineConfig& cfg) {
  if (cfg.kmeans_restarts < 1) throw ConfigError("kmeans_restarts must be >= 1");
  const Matrix& x = features.data();
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (k < 1 || k > n) throw ConfigError("kmeans: need 1 <= k <= n");

  std::mt19937_64 rng(cfg.seed);
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (std::size_t restart = 0; restart < cfg.kmeans_restarts; ++restart) {
    Matrix centroids = detail::kmeanspp_seed(x, k, rng);
    std::vector<std::size_t> assignment(n, 0);
    double current = detail::assign_points(x, centroids, assignment);
    std::vector<double> trace{current};
    for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
      Matrix sums(k, d);
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        auto dst = sums.row(assignment[i]);
        auto src = x.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        ++counts[assignment[i]];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        auto dst = centroids.row(c);
        auto src = sums.row(c);
        for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] / static_cast<double>(counts[c]);
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (counts[assignment[i]] <= 1) continue;
          double dist = detail::squared_distance(x.row(i), centroids.row(assignment[i]));
          if (dist > far_d) {
            far_d = dist;
            far = i;
          }
        }
        if (far_d < 0.0) break;
        --counts[assignment[far]];
        assignment[far] = c;
        counts[c] = 1;
        std::copy(x.row(far).begin(), x.row(far).end(), centroids.row(c).begin());
      }
      std::vector<std::size_t> previous = assignment;
      double updated = detail::assign_points(x, centroids, assignment);
      trace.push_back(updated);
      bool stable = previous == assignment;
      current = updated;
      if (stable) break;
    }
    // Report the centroids of the final partition.
    {
      Matrix sums(k, d);
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        auto dst = sums.row(assignment[i]);
        auto src = x.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        ++counts[assignment[i]];
      }
      for (std::size_t c = 0; c < k; ++c)
        if (counts[c] > 0)
          for (std::size_t j = 0; j < d; ++j) centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
      double settled = detail::wcss_of(x, centroids, assignment);
      if (settled < current) {
        current = settled;
        trace.push_back(settled);
      }
    }
    if (current < best.wcss) {
      best.assignment = assignment;
      best.centroids = centroids;
      best.wcss = current;
      best.wcss_trace = trace;
      best.restart = restart;
    }
  }
  return best;
}

}  // namespace transduct
