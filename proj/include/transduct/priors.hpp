#pragma once

// Initial assignment matrix X(0): uniform or softmax priors, class masks and
// anchor injection.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "transduct/core.hpp"

namespace transduct {

/// Allowed classes per sample; an empty outer vector means "no mask".
using ClassMask = std::vector<std::vector<std::size_t>>;

enum class PriorMode { Uniform, Logits };

struct PriorConfig {
  PriorMode mode = PriorMode::Uniform;
  double temperature = 1.0;
  std::optional<ClassMask> class_mask;

  void validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be positive");
    if (class_mask)
      for (std::size_t i = 0; i < class_mask->size(); ++i)
        if ((*class_mask)[i].empty()) throw ConfigError("class mask of sample " + std::to_string(i) + " is empty");
  }
};

inline AssignmentMatrix uniform_prior(std::size_t n, std::size_t m) {
  if (n == 0) throw EmptyInput("uniform_prior: n must be >= 1");
  if (m < 2) throw ConfigError("uniform_prior: m must be >= 2");
  return AssignmentMatrix(Matrix(n, m, 1.0 / static_cast<double>(m)));
}

/// Row-wise softmax(logits / T), stabilized by subtracting the row maximum.
inline AssignmentMatrix softmax_with_temperature(const Matrix& logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be positive");
  if (logits.rows() == 0 || logits.cols() == 0) throw EmptyInput("softmax_with_temperature: empty logits");
  if (!logits.all_finite()) throw NonFinite("softmax_with_temperature: non-finite logit");
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto in = logits.row(i);
    auto dst = out.row(i);
    double top = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      dst[j] = std::exp((in[j] - top) / temperature);
      sum += dst[j];
    }
    for (double& v : dst) v /= sum;
  }
  return AssignmentMatrix(std::move(out));
}

/// Zeroes the classes a sample is not allowed to take and renormalizes.
inline AssignmentMatrix apply_class_mask(const AssignmentMatrix& x, const ClassMask& mask) {
  if (mask.size() != x.rows()) throw LengthMismatch("apply_class_mask: mask size differs from n");
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (mask[i].empty()) throw ConfigError("class mask of sample " + std::to_string(i) + " is empty");
    for (std::size_t c : mask[i]) {
      if (c >= x.cols()) throw OutOfRange("class mask entry " + std::to_string(c) + " out of range");
      out(i, c) = x(i, c);
    }
  }
  return row_normalize(std::move(out));
}

/// Replaces every anchored row with the one-hot vector of its class.
inline AssignmentMatrix inject_anchors(const AssignmentMatrix& x, const AnchorSet& anchors) {
  Matrix out = x.matrix();
  for (const auto& a : anchors.entries()) {
    if (a.index >= out.rows()) throw OutOfRange("anchor index " + std::to_string(a.index) + " out of range");
    auto hot = one_hot(a.label, out.cols());
    std::copy(hot.begin(), hot.end(), out.row(a.index).begin());
  }
  return AssignmentMatrix(std::move(out), AssignmentMatrix::Trusted{});
}

/// Full initialization: prior, optional mask, anchors. `logits` is required
/// in Logits mode. An anchor whose class is masked out is a config error.
inline AssignmentMatrix initial_assignment(std::size_t n, std::size_t m, const PriorConfig& cfg,
                                           const AnchorSet& anchors, const Matrix* logits = nullptr) {
  cfg.validate();
  AssignmentMatrix x = [&] {
    if (cfg.mode == PriorMode::Uniform) return uniform_prior(n, m);
    if (logits == nullptr) throw ConfigError("logits prior requested but no logits supplied");
    if (logits->rows() != n || logits->cols() != m) throw ShapeMismatch("logits must be n x m");
    return softmax_with_temperature(*logits, cfg.temperature);
  }();
  if (cfg.class_mask) {
    const ClassMask& mask = *cfg.class_mask;
    for (const auto& a : anchors.entries()) {
      if (a.index >= mask.size()) continue;
      const auto& allowed = mask[a.index];
      if (std::find(allowed.begin(), allowed.end(), a.label) == allowed.end())
        throw ConfigError("anchor " + std::to_string(a.index) + " has a class excluded by its mask");
    }
    x = apply_class_mask(x, mask);
  }
  return inject_anchors(x, anchors);
}

}  // namespace transduct
