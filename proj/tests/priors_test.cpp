#include <gtest/gtest.h>

#include "support/generators.hpp"
#include "transduct/priors.hpp"

using namespace transduct;

TEST(UniformPrior, EveryEntryOneOverM) {
  const double third = 1.0 / 3.0;
  EXPECT_EQ(uniform_prior(2, 3).matrix(), Matrix::from_rows({{third, third, third}, {third, third, third}}));
  EXPECT_EQ(uniform_prior(1, 2).matrix(), Matrix::from_rows({{0.5, 0.5}}));
  EXPECT_THROW(uniform_prior(0, 2), EmptyInput);
  EXPECT_THROW(uniform_prior(2, 1), ConfigError);
}

TEST(Softmax, SymmetricLogits) {
  for (double t : {0.01, 1.0, 50.0}) {
    auto x = softmax_with_temperature(Matrix::from_rows({{0, 0}}), t);
    EXPECT_EQ(x(0, 0), 0.5);
    EXPECT_EQ(x(0, 1), 0.5);
  }
}

TEST(Softmax, UnitTemperature) {
  auto x = softmax_with_temperature(Matrix::from_rows({{2, 0}}), 1.0);
  // e^2 / (e^2 + 1)
  EXPECT_NEAR(x(0, 0), 0.8808, 1e-4);
  EXPECT_NEAR(x(0, 1), 0.1192, 1e-4);
}

TEST(Softmax, LowTemperatureSharpens) {
  auto x = softmax_with_temperature(Matrix::from_rows({{2, 0}}), 0.1);
  EXPECT_GT(x(0, 0), 0.9999);
}

TEST(Softmax, NoOverflowAtTinyTemperature) {
  auto x = softmax_with_temperature(Matrix::from_rows({{800, 0, -800}}), 1e-3);
  EXPECT_EQ(x(0, 0), 1.0);
  EXPECT_EQ(x(0, 2), 0.0);
}

TEST(Softmax, Errors) {
  EXPECT_THROW(softmax_with_temperature(Matrix::from_rows({{NAN, 0}}), 1.0), NonFinite);
  EXPECT_THROW(softmax_with_temperature(Matrix::from_rows({{0, 0}}), 0.0), ConfigError);
}

TEST(Softmax, ShiftInvariantMonotoneAndFlatAtHighTemperature) {
  tsupport::Gen gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = gen.index(1, 10), m = gen.index(2, 10);
    Matrix logits = gen.gaussian(n, m, 3.0);
    double t = gen.uniform(0.1, 5.0);
    auto base = softmax_with_temperature(logits, t);

    Matrix shifted = logits;
    for (std::size_t i = 0; i < n; ++i) {
      double c = gen.uniform(-100.0, 100.0);
      for (double& v : shifted.row(i)) v += c;
    }
    EXPECT_LE(max_abs_diff(softmax_with_temperature(shifted, t).matrix(), base.matrix()), 1e-12);

    Matrix raised = logits;
    std::size_t bump = gen.index(0, m - 1);
    raised(0, bump) += 0.5;
    EXPECT_GT(softmax_with_temperature(raised, t)(0, bump), base(0, bump));

    auto flat = softmax_with_temperature(logits, 1e6);
    for (double v : flat.matrix().values()) EXPECT_LE(std::abs(v - 1.0 / static_cast<double>(m)), 1e-5);
  }
}

TEST(ClassMask, ZeroesAndRenormalizes) {
  const double third = 1.0 / 3.0;
  AssignmentMatrix x(Matrix::from_rows({{third, third, third}}));
  auto out = apply_class_mask(x, {{0, 2}});
  EXPECT_EQ(out.matrix(), Matrix::from_rows({{0.5, 0, 0.5}}));
}

TEST(ClassMask, FullMaskUnchanged) {
  AssignmentMatrix x(Matrix::from_rows({{0.8, 0.2}}));
  EXPECT_EQ(apply_class_mask(x, {{0, 1}}).matrix(), x.matrix());
}

TEST(ClassMask, ConflictThrowsZeroRowSum) {
  AssignmentMatrix x(Matrix::from_rows({{1, 0}}));
  EXPECT_THROW(apply_class_mask(x, {{1}}), ZeroRowSum);
  EXPECT_THROW(apply_class_mask(x, {{}}), ConfigError);
}

TEST(InjectAnchors, ReplacesAnchoredRows) {
  AssignmentMatrix x(Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
  auto out = inject_anchors(x, AnchorSet({{0, 1}}, 2, 2));
  EXPECT_EQ(out.matrix(), Matrix::from_rows({{0, 1}, {0.5, 0.5}}));
  EXPECT_EQ(inject_anchors(x, AnchorSet()).matrix(), x.matrix());
  auto all = inject_anchors(x, AnchorSet({{0, 1}, {1, 0}}, 2, 2));
  EXPECT_EQ(all.matrix(), Matrix::from_rows({{0, 1}, {1, 0}}));
}

TEST(InjectAnchors, Idempotent) {
  tsupport::Gen gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = gen.index(1, 20), m = gen.index(2, 6);
    auto x = gen.simplex(n, m);
    std::vector<Anchor> entries;
    for (std::size_t i = 0; i < n; ++i)
      if (gen.uniform() < 0.3) entries.push_back({i, gen.index(0, m - 1)});
    AnchorSet anchors(entries, n, m);
    auto once = inject_anchors(x, anchors);
    EXPECT_EQ(inject_anchors(once, anchors).matrix(), once.matrix());
    EXPECT_NO_THROW(AssignmentMatrix::validate(once.matrix()));
  }
}

TEST(InitialAssignment, MaskedOutAnchorIsConfigError) {
  PriorConfig cfg;
  cfg.class_mask = ClassMask{{1}, {0, 1}};
  EXPECT_THROW(initial_assignment(2, 2, cfg, AnchorSet({{0, 0}}, 2, 2)), ConfigError);
}

TEST(InitialAssignment, LogitsMaskAndAnchors) {
  PriorConfig cfg;
  cfg.mode = PriorMode::Logits;
  cfg.temperature = 1.0;
  cfg.class_mask = ClassMask{{0, 1, 2}, {0, 2}, {1}};
  Matrix logits = Matrix::from_rows({{0, 0, 0}, {1, 5, 1}, {0, 0, 0}});
  auto x = initial_assignment(3, 3, cfg, AnchorSet({{0, 2}}, 3, 3), &logits);
  EXPECT_EQ(x.matrix(), Matrix::from_rows({{0, 0, 1}, {0.5, 0, 0.5}, {0, 1, 0}}));
  EXPECT_THROW(initial_assignment(3, 3, cfg, AnchorSet()), ConfigError);
}
