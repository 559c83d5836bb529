#pragma once

// Seeded isotropic Gaussian blobs, a stand-in for learned embeddings.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "transduct/core.hpp"

namespace transduct {

struct BlobSpec {
  std::size_t blobs = 3;
  std::size_t per_blob = 100;
  std::size_t dim = 2;
  double separation = 6.0;
  double stddev = 1.0;

  void validate() const {
    if (blobs < 1) throw InvalidSpec("need at least one blob");
    if (per_blob < 1) throw InvalidSpec("need at least one point per blob");
    if (dim < 1) throw InvalidSpec("dimension must be >= 1");
    if (!(separation >= 0.0) || !std::isfinite(separation)) throw InvalidSpec("separation must be finite and >= 0");
    if (!(stddev >= 0.0) || !std::isfinite(stddev)) throw InvalidSpec("stddev must be finite and >= 0");
  }
};

struct SyntheticData {
  FeatureSet features;
  LabelSet labels;
  /// Generating centroids, one row per blob.
  Matrix centroids;
};

/// Centroids are drawn uniformly from a cube of half-width separation * blobs
/// and rejected until pairwise at least `separation` apart. Points are
/// emitted blob by blob with ids "s0", "s1", ... and classes "c0", "c1", ...
inline SyntheticData make_synthetic(const BlobSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  const double half_width = std::max(1.0, spec.separation * static_cast<double>(spec.blobs));
  Matrix centroids(spec.blobs, spec.dim);
  constexpr int kMaxAttempts = 100000;
  for (std::size_t c = 0; c < spec.blobs; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      for (double& v : centroids.row(c)) v = half_width * box(rng);
      placed = true;
      for (std::size_t o = 0; o < c && placed; ++o) {
        double s = 0.0;
        for (std::size_t k = 0; k < spec.dim; ++k) {
          double d = centroids(c, k) - centroids(o, k);
          s += d * d;
        }
        placed = std::sqrt(s) >= spec.separation;
      }
    }
    if (!placed) throw InvalidSpec("could not place centroids at the requested separation");
  }

  const std::size_t n = spec.blobs * spec.per_blob;
  Matrix data(n, spec.dim);
  std::vector<std::string> ids;
  std::vector<std::size_t> labels;
  ids.reserve(n);
  labels.reserve(n);
  for (std::size_t c = 0; c < spec.blobs; ++c)
    for (std::size_t p = 0; p < spec.per_blob; ++p) {
      std::size_t i = ids.size();
      for (std::size_t k = 0; k < spec.dim; ++k) data(i, k) = centroids(c, k) + spec.stddev * noise(rng);
      ids.push_back("s" + std::to_string(i));
      labels.push_back(c);
    }
  std::vector<std::string> names;
  for (std::size_t c = 0; c < spec.blobs; ++c) names.push_back("c" + std::to_string(c));
  return {FeatureSet(std::move(data), std::move(ids)), LabelSet(spec.blobs, std::move(labels), std::move(names)),
          std::move(centroids)};
}

}  // namespace transduct
