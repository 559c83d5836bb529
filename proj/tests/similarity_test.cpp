#include <gtest/gtest.h>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "transduct/similarity.hpp"

using namespace transduct;

namespace {

FeatureSet two_samples(std::vector<double> a, std::vector<double> b) {
  return FeatureSet(Matrix::from_rows({std::move(a), std::move(b)}));
}

}  // namespace

TEST(Pearson, PerfectPositive) {
  auto r = pearson_matrix(two_samples({1, 2, 3}, {2, 4, 6}));
  EXPECT_NEAR(r.w(0, 1), 1.0, 1e-15);
  EXPECT_EQ(r.w(0, 0), 0.0);
  EXPECT_TRUE(r.zero_variance.empty());
}

TEST(Pearson, PerfectNegative) {
  auto r = pearson_matrix(two_samples({1, 2, 3}, {3, 2, 1}));
  EXPECT_NEAR(r.w(0, 1), -1.0, 1e-15);
}

TEST(Pearson, ZeroVarianceSampleIsFlagged) {
  auto r = pearson_matrix(two_samples({1, 2, 3}, {5, 5, 5}));
  EXPECT_EQ(r.w(0, 1), 0.0);
  EXPECT_EQ(r.w(1, 0), 0.0);
  EXPECT_EQ(r.zero_variance, (std::vector<std::size_t>{1}));
}

TEST(Pearson, ConstantRowWithInexactMeanIsFlagged) {
  auto r = pearson_matrix(two_samples({0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1}, {1, 2, 3, 4, 5, 6, 8}));
  EXPECT_EQ(r.zero_variance, (std::vector<std::size_t>{0}));
}

TEST(Pearson, Preconditions) {
  EXPECT_THROW(pearson_matrix(FeatureSet(Matrix::from_rows({{1, 2}}))), InsufficientSamples);
  EXPECT_THROW(pearson_matrix(FeatureSet(Matrix::from_rows({{1}, {2}}))), ConfigError);
}

TEST(Pearson, MatchesTwoPassOracleAndIsBounded) {
  tsupport::Gen gen(2024);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = gen.index(2, 25), d = gen.index(2, 40);
    Matrix x = gen.gaussian(n, d, gen.uniform(0.1, 10.0));
    for (double& v : x.values()) v += gen.uniform(-5.0, 5.0);
    FeatureSet f(x);
    auto r = pearson_matrix(f);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(r.w(i, i), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_GE(r.w(i, j), -1.0);
        EXPECT_LE(r.w(i, j), 1.0);
        EXPECT_EQ(r.w(i, j), r.w(j, i));
        if (i != j) EXPECT_NEAR(r.w(i, j), tsupport::naive_pearson(x.row(i), x.row(j)), 1e-12);
      }
    }
  }
}

TEST(Pearson, InvariantUnderPerSampleAffineMaps) {
  tsupport::Gen gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = gen.index(2, 20), d = gen.index(2, 30);
    Matrix x = gen.gaussian(n, d);
    Matrix y = x;
    for (std::size_t i = 0; i < n; ++i) {
      double a = gen.uniform(0.01, 100.0), b = gen.uniform(-50.0, 50.0);
      for (double& v : y.row(i)) v = a * v + b;
    }
    auto wx = pearson_matrix(FeatureSet(x));
    auto wy = pearson_matrix(FeatureSet(y));
    EXPECT_LE(max_abs_diff(wx.w.matrix(), wy.w.matrix()), 1e-9);
  }
}

TEST(HandleNegatives, ClampZeroesNegatives) {
  SimilarityMatrix w(Matrix::from_rows({{0, -0.5}, {-0.5, 0}}));
  EXPECT_EQ(handle_negatives(w, NegativeHandling::Clamp).matrix(), Matrix(2, 2));
}

TEST(HandleNegatives, ShiftAddsMostNegativeAndRezeroesDiagonal) {
  SimilarityMatrix w(Matrix::from_rows({{0, -0.5}, {0.3, 0}}));
  auto out = handle_negatives(w, NegativeHandling::Shift);
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_EQ(out(1, 1), 0.0);
  EXPECT_EQ(out(0, 1), 0.0);
  EXPECT_NEAR(out(1, 0), 0.8, 1e-15);
}

TEST(HandleNegatives, NonNegativeInputUnchanged) {
  SimilarityMatrix w(Matrix::from_rows({{0, 0.7}, {0.7, 0}}));
  EXPECT_EQ(handle_negatives(w, NegativeHandling::Clamp).matrix(), w.matrix());
  EXPECT_EQ(handle_negatives(w, NegativeHandling::Shift).matrix(), w.matrix());
}

TEST(HandleNegatives, ClampIsIdempotent) {
  tsupport::Gen gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto r = pearson_matrix(FeatureSet(gen.gaussian(gen.index(2, 15), gen.index(2, 10))));
    auto once = handle_negatives(r.w, NegativeHandling::Clamp);
    auto twice = handle_negatives(once, NegativeHandling::Clamp);
    EXPECT_EQ(once.matrix(), twice.matrix());
    EXPECT_TRUE(once.is_nonnegative());
    EXPECT_TRUE(handle_negatives(r.w, NegativeHandling::Shift).is_nonnegative());
  }
}

TEST(SparsifyKnn, TopOneThenMaxSymmetrize) {
  SimilarityMatrix w(Matrix::from_rows({{0, 0.9, 0.1}, {0.9, 0, 0.2}, {0.1, 0.2, 0}}));
  auto out = sparsify_knn(w, 1);
  EXPECT_EQ(out.matrix(), Matrix::from_rows({{0, 0.9, 0}, {0.9, 0, 0.2}, {0, 0.2, 0}}));
}

TEST(SparsifyKnn, FullGraphUnchanged) {
  SimilarityMatrix w(Matrix::from_rows({{0, 0.9, 0.1}, {0.9, 0, 0.2}, {0.1, 0.2, 0}}));
  EXPECT_EQ(sparsify_knn(w, 2).matrix(), w.matrix());
}

TEST(SparsifyKnn, TiesKeepLowestColumn) {
  Matrix all(4, 4, 0.5);
  for (std::size_t i = 0; i < 4; ++i) all(i, i) = 0.0;
  auto out = sparsify_knn(SimilarityMatrix(all), 1);
  // Before symmetrization: 0->1, 1->0, 2->0, 3->0.
  Matrix expected = Matrix::from_rows({{0, 0.5, 0.5, 0.5}, {0.5, 0, 0, 0}, {0.5, 0, 0, 0}, {0.5, 0, 0, 0}});
  EXPECT_EQ(out.matrix(), expected);
}

TEST(SparsifyKnn, RejectsBadK) {
  SimilarityMatrix w(Matrix(3, 3));
  EXPECT_THROW(sparsify_knn(w, 0), ConfigError);
  EXPECT_THROW(sparsify_knn(w, 3), ConfigError);
}

TEST(SparsifyKnn, EdgesComeFromSomeRowsTopK) {
  tsupport::Gen gen(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = gen.index(3, 30);
    auto w = gen.symmetric_weights(n);
    std::size_t k = gen.index(1, n - 1);
    auto out = sparsify_knn(w, k);
    EXPECT_TRUE(out.is_symmetric());
    EXPECT_TRUE(out.is_nonnegative());
    // Rank of j in row i: off-diagonal entries strictly better, ties to the lower column.
    auto in_top_k = [&](std::size_t i, std::size_t j) {
      std::size_t better = 0;
      for (std::size_t c = 0; c < n; ++c)
        if (c != i && c != j && (w(i, c) > w(i, j) || (w(i, c) == w(i, j) && c < j))) ++better;
      return better < k;
    };
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        bool kept = in_top_k(i, j) || in_top_k(j, i);
        EXPECT_EQ(out(i, j), kept ? w(i, j) : 0.0) << i << "," << j;
      }
  }
}
