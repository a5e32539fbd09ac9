#include <gtest/gtest.h>

#include <algorithm>

#include "echoforge/errors.hpp"
#include "echoforge/metrics.hpp"
#include "echoforge/report.hpp"
#include "echoforge/rng.hpp"

using namespace echoforge;

TEST(Confusion, PerfectDiagonal) {
  std::vector<int> t;
  for (int c = 0; c < 30; ++c) t.insert(t.end(), {c, c});
  const ConfusionMatrix cm = confusion(t, t);
  EXPECT_EQ(cm.total(), 60);
  EXPECT_EQ(cm.counts.diagonal().sum(), 60);
  EXPECT_DOUBLE_EQ(cm.accuracy(), 1.0);
  const auto fpr = false_positive_rate(cm);
  EXPECT_EQ(fpr.defined_classes, 30);
  EXPECT_DOUBLE_EQ(fpr.macro, 0.0);
  EXPECT_EQ(cm.names.size(), 30u);
}

TEST(Confusion, AllWrongIntoOneColumn) {
  const std::vector<int> truth(10, 0), pred(10, 1);
  const ConfusionMatrix cm = confusion(truth, pred);
  EXPECT_EQ(cm.counts(0, 1), 10);
  EXPECT_DOUBLE_EQ(cm.accuracy(), 0.0);
  const auto fpr = false_positive_rate(cm);
  // Class 0 has no negatives, so its rate is undefined.
  EXPECT_FALSE(fpr.per_class[0].has_value());
  EXPECT_DOUBLE_EQ(*fpr.per_class[1], 1.0);
  EXPECT_DOUBLE_EQ(*fpr.per_class[2], 0.0);
  EXPECT_EQ(fpr.defined_classes, 29);
  EXPECT_NEAR(fpr.macro, 1.0 / 29.0, 1e-15);
}

TEST(Confusion, TwoThirdsAccuracy) {
  const ConfusionMatrix cm = confusion({0, 1, 2}, {0, 1, 1});
  EXPECT_NEAR(cm.accuracy(), 2.0 / 3.0, 1e-15);
}

TEST(Confusion, TwoClassFalsePositiveRate) {
  std::vector<int> t, p;
  const auto add = [&](int truth, int pred, int n) {
    for (int i = 0; i < n; ++i) {
      t.push_back(truth);
      p.push_back(pred);
    }
  };
  add(0, 0, 8);
  add(0, 1, 2);
  add(1, 0, 1);
  add(1, 1, 9);
  const auto fpr = false_positive_rate(confusion(t, p));
  EXPECT_NEAR(*fpr.per_class[0], 0.1, 1e-15);
  EXPECT_NEAR(*fpr.per_class[1], 0.2, 1e-15);
}

TEST(Confusion, BruteForceTally) {
  Rng rng(3);
  std::vector<int> t, p;
  for (int i = 0; i < 2000; ++i) {
    t.push_back(uniform_int(rng, 0, 29));
    p.push_back(uniform_int(rng, 0, 29));
  }
  const ConfusionMatrix cm = confusion(t, p);
  const auto fpr = false_positive_rate(cm);
  for (int c = 0; c < 30; ++c) {
    long fp = 0, tn = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == c) continue;
      (p[i] == c ? fp : tn) += 1;
    }
    ASSERT_TRUE(fpr.per_class[c]);
    EXPECT_NEAR(*fpr.per_class[c], static_cast<double>(fp) / static_cast<double>(fp + tn), 1e-15);
  }
  // A uniform random classifier accepts each wrong class 1/30 of the time.
  EXPECT_NEAR(fpr.macro, 1.0 / 30.0, 0.005);
}

TEST(Confusion, Errors) {
  EXPECT_THROW(confusion({0, 1}, {0}), ShapeError);
  EXPECT_THROW(confusion({30}, {0}), ShapeError);
  EXPECT_THROW(confusion({0}, {-1}), ShapeError);
  EXPECT_THROW(false_positive_rate(ConfusionMatrix{}), ConfigError);
}

TEST(Folds, MeanOfFoldAccuracies) {
  FoldResult a, b;
  a.name = "a";
  a.accuracy = 0.90;
  a.cm = confusion({0, 0}, {0, 1});
  b.name = "b";
  b.accuracy = 0.94;
  b.cm = confusion({2}, {2});
  const FoldSummary s = fold_average({a, b});
  EXPECT_NEAR(s.mean_accuracy, 0.92, 1e-15);
  EXPECT_EQ(s.total.total(), 3);
  EXPECT_EQ(s.total.counts(2, 2), 1);
  EXPECT_NEAR(fold_average({b, a}).mean_accuracy, s.mean_accuracy, 1e-15);
  EXPECT_THROW(fold_average({}), ConfigError);
  EXPECT_EQ(report::percent(0.92), "92.0%");
  EXPECT_EQ(report::percent(0.9166), "91.7%");
}
