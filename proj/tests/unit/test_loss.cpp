#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "hieract/error.hpp"
#include "hieract/loss.hpp"

namespace hieract {
namespace {

// Extended-precision reference: -s_t + log(sum exp(s_j)) without max shifting.
long double reference_ce(const std::vector<double>& s, int t) {
  long double sum = 0;
  for (double v : s) sum += std::exp(static_cast<long double>(v));
  return std::log(sum) - s[static_cast<std::size_t>(t)];
}

TEST(CrossEntropy, UniformLogitsGiveLogN) {
  for (int t = 0; t < 4; ++t) EXPECT_NEAR(cross_entropy(std::vector<double>(4, 0.3), t), std::log(4.0), 1e-15);
  EXPECT_NEAR(cross_entropy(std::vector<double>(4, 0.0), 2), 1.386294, 1e-6);
}

TEST(CrossEntropy, TinyLossKeepsPrecision) {
  const double l = cross_entropy(std::vector<double>{10, -10}, 0);
  EXPECT_NEAR(l, 2.0611536203143807e-9, 1e-23);  // log1p(exp(-20))
  EXPECT_GT(l, 0.0);
}

TEST(CrossEntropyProperty, ShiftInvariance) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> s(2 + uniform_below(rng, 30));
    for (double& v : s) v = 5.0 * standard_normal(rng);
    const int t = static_cast<int>(uniform_below(rng, s.size()));
    const double c = 200.0 * standard_normal(rng);
    std::vector<double> shifted = s;
    for (double& v : shifted) v += c;
    EXPECT_NEAR(cross_entropy(shifted, t), cross_entropy(s, t), 1e-9);
  }
}

TEST(CrossEntropyProperty, AgreesWithExtendedPrecision) {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> s(2 + uniform_below(rng, 98));
    for (double& v : s) v = 4.0 * standard_normal(rng);
    const int t = static_cast<int>(uniform_below(rng, s.size()));
    EXPECT_NEAR(cross_entropy(s, t), static_cast<double>(reference_ce(s, t)), 1e-12);
  }
}

TEST(CrossEntropyProperty, NonNegativeAndDecreasingInTargetLogit) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> s(2 + uniform_below(rng, 10));
    for (double& v : s) v = 3.0 * standard_normal(rng);
    const int t = static_cast<int>(uniform_below(rng, s.size()));
    double prev = cross_entropy(s, t);
    EXPECT_GE(prev, 0.0);
    for (int k = 0; k < 5; ++k) {
      s[static_cast<std::size_t>(t)] += 0.5;
      const double next = cross_entropy(s, t);
      EXPECT_LT(next, prev);
      prev = next;
    }
  }
}

TEST(CrossEntropy, GradientIsSoftmaxMinusOneHot) {
  const std::vector<double> s{1.0, -2.0, 0.5};
  const auto g = cross_entropy_grad(s, 2);
  const auto p = softmax(s);
  EXPECT_NEAR(g[0], p[0], 1e-15);
  EXPECT_NEAR(g[1], p[1], 1e-15);
  EXPECT_NEAR(g[2], p[2] - 1.0, 1e-15);
  const auto r = testing::loss_gradcheck(4, 500, 1e-4, 1e-5);
  EXPECT_EQ(r.over_threshold, 0) << r.worst_parameter << " rel " << r.max_rel_error;
}

TEST(CrossEntropy, Errors) {
  EXPECT_THROW(cross_entropy(std::vector<double>{1.0}, 0), Error);
  EXPECT_THROW(cross_entropy(std::vector<double>{1.0, 2.0}, 2), Error);
  try {
    cross_entropy(std::vector<double>{1.0, std::nan("")}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kDivergence);
  }
}

TEST(Softmax, SumsToOneAtExtremes) {
  const auto p = softmax(std::vector<double>{1000, 999, -1000});
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
  EXPECT_GT(p[0], p[1]);
}

TEST(TotalLoss, Examples) {
  EXPECT_DOUBLE_EQ(total_loss(1.0, 2.0, 3.0, LossWeights{}), 17.0);
  EXPECT_DOUBLE_EQ(total_loss(0.7, 2.0, 3.0, LossWeights{1, 0, 0}), 0.7);
}

TEST(TotalLossProperty, LinearAndHomogeneous) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = uniform01(rng) * 5, b = uniform01(rng) * 5, c = uniform01(rng) * 5;
    const LossWeights w{uniform01(rng) * 4, uniform01(rng) * 4, uniform01(rng) * 4};
    EXPECT_NEAR(total_loss(a, b, c, w), w.event * a + w.set * b + w.element * c, 1e-12);
    const double k = 0.5 + uniform01(rng) * 3;
    EXPECT_NEAR(total_loss(a, b, c, {k * w.event, k * w.set, k * w.element}), k * total_loss(a, b, c, w), 1e-12);
    EXPECT_NEAR(total_loss(a + 1.0, b, c, w) - total_loss(a, b, c, w), w.event, 1e-12);
  }
}

TEST(LossWeights, Validation) {
  EXPECT_NO_THROW(LossWeights{}.validate());
  EXPECT_THROW((LossWeights{-1, 2, 4}.validate()), Error);
}

}  // namespace
}  // namespace hieract
