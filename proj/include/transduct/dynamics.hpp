#pragma once

// Replicator-dynamics refinement of an assignment matrix over a similarity
// graph (graph transduction game / group-loss refinement).
//
// One step multiplies every probability by the support its class receives
// from the neighbours, Pi = W X, and renormalizes each row:
//
//   X(t+1) = Q^-1 [X(t) .* Pi(t)],  Q = diag([X(t) .* Pi(t)] 1)
//
// For non-negative symmetric W the consistency functional
// F(X) = sum_ij sum_l w_ij x_il x_jl never decreases along the iterates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <vector>

#include "transduct/core.hpp"
#include "transduct/parallel.hpp"

namespace transduct {

struct DynamicsConfig {
  std::size_t max_iterations = 100;
  /// L1 distance between successive iterates below which the run stops.
  double tolerance = 1e-6;
  /// Group-loss mode: run exactly this many steps, no tolerance check.
  std::optional<std::size_t> fixed_iterations;
  bool reclamp_anchors = true;

  void validate() const {
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
  }
};

/// Default number of steps in group-loss mode.
inline constexpr std::size_t kGroupLossIterations = 3;

struct DynamicsTrace {
  /// F(X(0)), F(X(1)), ..., one entry per iterate.
  std::vector<double> functional_values;
  std::size_t iterations_used = 0;
  bool converged = false;
  /// Non-anchor rows frozen at least once because their support vanished.
  std::vector<std::size_t> degenerate_rows;
};

struct StepResult {
  AssignmentMatrix x;
  std::vector<std::size_t> degenerate_rows;
};

namespace detail {

inline void check_shapes(const SimilarityMatrix& w, const AssignmentMatrix& x) {
  if (w.size() != x.rows())
    throw ShapeMismatch("similarity is " + std::to_string(w.size()) + "x" + std::to_string(w.size()) +
                        " but assignment has " + std::to_string(x.rows()) + " rows");
}

}  // namespace detail

/// Pi = W X; pi_il is the evidence the neighbours of i give to class l.
inline Matrix support(const SimilarityMatrix& w, const AssignmentMatrix& x) {
  detail::check_shapes(w, x);
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  const Matrix& xm = x.matrix();
  Matrix pi(n, m);
  parallel_for(n, [&](std::size_t i) {
    auto out = pi.row(i);
    auto wi = w.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      double wij = wi[j];
      if (wij == 0.0) continue;
      auto xj = xm.row(j);
      for (std::size_t l = 0; l < m; ++l) out[l] += wij * xj[l];
    }
  }, 16);
  return pi;
}

/// One replicator step in matrix form. Rows whose normalizer x_i . pi_i is
/// not positive are copied unchanged and reported as degenerate.
inline StepResult replicator_step(const SimilarityMatrix& w, const AssignmentMatrix& x) {
  Matrix next = support(w, x);
  const Matrix& xm = x.matrix();
  std::vector<std::size_t> degenerate;
  for (std::size_t i = 0; i < next.rows(); ++i) {
    auto r = next.row(i);
    auto xi = xm.row(i);
    double q = 0.0;
    for (std::size_t l = 0; l < r.size(); ++l) {
      r[l] *= xi[l];
      q += r[l];
    }
    if (!(q > 0.0) || !std::isfinite(q)) {
      std::copy(xi.begin(), xi.end(), r.begin());
      degenerate.push_back(i);
      continue;
    }
    for (double& v : r) v /= q;
  }
  return {AssignmentMatrix(std::move(next), AssignmentMatrix::Trusted{}), std::move(degenerate)};
}

/// The same step written per entry: x_il * pi_il / sum_mu x_imu * pi_imu,
/// each pi recomputed from W directly.
inline StepResult replicator_step_elementwise(const SimilarityMatrix& w, const AssignmentMatrix& x) {
  detail::check_shapes(w, x);
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  Matrix next(n, m);
  std::vector<std::size_t> degenerate;
  std::vector<double> payoff(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < m; ++l) {
      double pi = 0.0;
      for (std::size_t j = 0; j < n; ++j) pi += w(i, j) * x(j, l);
      payoff[l] = x(i, l) * pi;
    }
    double mean = 0.0;
    for (std::size_t mu = 0; mu < m; ++mu) mean += payoff[mu];
    if (!(mean > 0.0) || !std::isfinite(mean)) {
      for (std::size_t l = 0; l < m; ++l) next(i, l) = x(i, l);
      degenerate.push_back(i);
      continue;
    }
    for (std::size_t l = 0; l < m; ++l) next(i, l) = payoff[l] / mean;
  }
  return {AssignmentMatrix(std::move(next), AssignmentMatrix::Trusted{}), std::move(degenerate)};
}

/// F(X) = sum_i sum_j sum_l w_ij x_il x_jl, accumulated in extended
/// precision so that step-to-step differences near a fixed point are not
/// swamped by summation error.
inline double consistency_functional(const SimilarityMatrix& w, const AssignmentMatrix& x) {
  detail::check_shapes(w, x);
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  long double total = 0.0L;
  std::vector<long double> pi(m);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(pi.begin(), pi.end(), 0.0L);
    for (std::size_t j = 0; j < n; ++j) {
      long double wij = w(i, j);
      if (wij == 0.0L) continue;
      for (std::size_t l = 0; l < m; ++l) pi[l] += wij * x(j, l);
    }
    for (std::size_t l = 0; l < m; ++l) total += static_cast<long double>(x(i, l)) * pi[l];
  }
  return static_cast<double>(total);
}

/// Iterates replicator steps from x0. Stops when the L1 change drops below
/// the tolerance or max_iterations is hit; with fixed_iterations set, runs
/// exactly that many steps. Anchored rows are re-set to one-hot after every
/// step when reclamp_anchors is on.
inline std::pair<AssignmentMatrix, DynamicsTrace> run_dynamics(const SimilarityMatrix& w, AssignmentMatrix x0,
                                                               const DynamicsConfig& cfg,
                                                               const AnchorSet& anchors = {}) {
  cfg.validate();
  detail::check_shapes(w, x0);
  if (cfg.fixed_iterations && *cfg.fixed_iterations < 1) throw ConfigError("fixed_iterations must be >= 1");
  const std::vector<bool> anchored = anchors.mask(x0.rows());
  for (const auto& a : anchors.entries())
    if (a.label >= x0.cols()) throw OutOfRange("anchor class out of range");

  DynamicsTrace trace;
  std::set<std::size_t> degenerate;
  AssignmentMatrix x = std::move(x0);
  trace.functional_values.push_back(consistency_functional(w, x));

  const std::size_t steps = cfg.fixed_iterations.value_or(cfg.max_iterations);
  for (std::size_t t = 0; t < steps; ++t) {
    StepResult step = replicator_step(w, x);
    for (std::size_t i : step.degenerate_rows)
      if (!anchored[i]) degenerate.insert(i);
    Matrix next = step.x.matrix();
    if (cfg.reclamp_anchors) {
      for (const auto& a : anchors.entries()) {
        auto r = next.row(a.index);
        std::fill(r.begin(), r.end(), 0.0);
        r[a.label] = 1.0;
      }
    }
    double delta = l1_distance(next, x.matrix());
    x = AssignmentMatrix(std::move(next), AssignmentMatrix::Trusted{});
    trace.functional_values.push_back(consistency_functional(w, x));
    trace.iterations_used = t + 1;
    trace.converged = delta < cfg.tolerance;
    if (!cfg.fixed_iterations && trace.converged) break;
  }
  trace.degenerate_rows.assign(degenerate.begin(), degenerate.end());
  return {std::move(x), std::move(trace)};
}

/// Probability floor applied before the logarithm in group_loss_value.
inline constexpr double kProbabilityFloor = 1e-12;

/// Mean cross-entropy -log x[i][y_i] over the labeled rows of `truth`.
inline double group_loss_value(const AssignmentMatrix& x, const LabelSet& truth) {
  if (truth.size() != x.rows()) throw LengthMismatch("group_loss_value: truth length differs from n");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (!truth.is_labeled(i)) continue;
    if (truth[i] >= x.cols()) throw OutOfRange("group_loss_value: class out of range");
    sum -= std::log(std::max(x(i, truth[i]), kProbabilityFloor));
    ++count;
  }
  if (count == 0) throw EmptyInput("group_loss_value: no labeled rows to evaluate");
  return sum / static_cast<double>(count);
}

}  // namespace transduct
