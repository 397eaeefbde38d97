#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "hieract/error.hpp"
#include "hieract/fusion_head.hpp"

namespace hieract {
namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = standard_normal(rng);
  return v;
}

JointHeadConfig tiny_config() {
  JointHeadConfig c;
  c.input_dims = {64, 64, 64};
  c.encoder_dims = {8, 16, 32};
  c.fusion_dim = 32;
  c.class_counts = {2, 3, 5};
  return c;
}

void zero_biases(JointHead& head) {
  for (auto& p : head.params().entries())
    if (p.name.ends_with("/bias")) p.value.fill(0.0);
}

// Dense affine map followed by optional ReLU, applied with stored parameters.
std::vector<double> affine(const ParamStore& store, const std::string& name, std::span<const double> x, bool relu) {
  const Tensor& w = store.value(store.index_of(name + "/weight"));
  const Tensor& b = store.value(store.index_of(name + "/bias"));
  const auto out = static_cast<std::size_t>(w.dim(0)), in = static_cast<std::size_t>(w.dim(1));
  std::vector<double> y(out);
  for (std::size_t o = 0; o < out; ++o) {
    double acc = b[o];
    for (std::size_t i = 0; i < in; ++i) acc += w[o * in + i] * x[i];
    y[o] = relu ? std::max(0.0, acc) : acc;
  }
  return y;
}

TEST(JointHead, PaperDimsShapeContract) {
  JointHeadConfig c;  // defaults are the paper dims
  c.class_counts = {4, 15, 99};
  JointHead head(c, 1);
  Rng rng(1);
  const auto f = random_vec(2048, rng);
  const auto e = head.encode(Level::kEvent, f), s = head.encode(Level::kSet, f), x = head.encode(Level::kElement, f);
  EXPECT_EQ(e.size(), 128u);
  EXPECT_EQ(s.size(), 256u);
  EXPECT_EQ(x.size(), 1024u);
  EXPECT_EQ(c.concat_dim(), 1408);
  const auto joint = head.fuse(e, s, x);
  EXPECT_EQ(joint.size(), 1024u);
  const auto logits = head.classify(joint);
  EXPECT_EQ(logits.event_logits.size(), 4u);
  EXPECT_EQ(logits.set_logits.size(), 15u);
  EXPECT_EQ(logits.element_logits.size(), 99u);
}

TEST(JointHead, TinyConfigLogitLengths) {
  JointHead head(tiny_config(), 2);
  Rng rng(2);
  std::map<Level, FeatureVector> features;
  for (Level l : kAllLevels) features[l] = {random_vec(64, rng), l};
  const auto logits = joint_forward(features, head);
  EXPECT_EQ(logits.event_logits.size(), 2u);
  EXPECT_EQ(logits.set_logits.size(), 3u);
  EXPECT_EQ(logits.element_logits.size(), 5u);
}

TEST(JointHead, MissingLevelIsRejected) {
  JointHead head(tiny_config(), 3);
  Rng rng(3);
  std::map<Level, FeatureVector> features{{Level::kEvent, {random_vec(64, rng), Level::kEvent}},
                                          {Level::kSet, {random_vec(64, rng), Level::kSet}}};
  EXPECT_THROW(joint_forward(features, head), Error);
}

TEST(JointHead, ZeroInputsWithZeroBiasGiveZeros) {
  JointHead head(tiny_config(), 4);
  zero_biases(head);
  const std::vector<double> zero(64, 0.0);
  for (Level l : kAllLevels)
    for (double v : head.encode(l, zero)) EXPECT_EQ(v, 0.0);
  for (double v : head.fuse(std::vector<double>(8), std::vector<double>(16), std::vector<double>(32))) EXPECT_EQ(v, 0.0);
}

TEST(JointHead, EncodeMatchesNaiveOracle) {
  JointHead head(tiny_config(), 5);
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_vec(64, rng);
    for (Level l : kAllLevels) {
      const auto got = head.encode(l, f);
      const auto want = affine(head.params(), "head/encoder_" + std::string(level_name(l)), f, true);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-6);
    }
  }
}

TEST(JointHead, ConcatenationIsOrdered) {
  JointHeadConfig c = tiny_config();
  c.encoder_dims = {8, 16, 16};  // equal set/element widths so the swap is well-typed
  JointHead head(c, 6);
  Rng rng(6);
  const auto e = random_vec(8, rng), s = random_vec(16, rng), x = random_vec(16, rng);
  EXPECT_NE(head.fuse(e, s, x), head.fuse(e, x, s));
}

TEST(JointHeadProperty, ForwardIsCompositionOfParts) {
  JointHead head(tiny_config(), 7);
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_vec(64, rng), b = random_vec(64, rng), c = random_vec(64, rng);
    const JointLogits full = head.forward({a, b, c});
    const auto joint = head.fuse(head.encode(Level::kEvent, a), head.encode(Level::kSet, b), head.encode(Level::kElement, c));
    const JointLogits parts = head.classify(joint);
    // Independent recomposition from raw parameters.
    std::vector<double> concat;
    for (auto [l, f] : {std::pair{Level::kEvent, &a}, std::pair{Level::kSet, &b}, std::pair{Level::kElement, &c}}) {
      const auto enc = affine(head.params(), "head/encoder_" + std::string(level_name(l)), *f, true);
      concat.insert(concat.end(), enc.begin(), enc.end());
    }
    const auto fused = affine(head.params(), "head/fusion", concat, true);
    for (Level l : kAllLevels) {
      const auto naive = affine(head.params(), "head/classifier_" + std::string(level_name(l)), fused, false);
      ASSERT_EQ(full.at(l).size(), naive.size());
      for (std::size_t i = 0; i < naive.size(); ++i) {
        EXPECT_NEAR(full.at(l)[i], parts.at(l)[i], 1e-6);
        EXPECT_NEAR(full.at(l)[i], naive[i], 1e-6);
      }
    }
  }
}

TEST(JointHead, GradientsMatchFiniteDifferences) {
  const auto r = testing::head_gradcheck(21, 80, 1e-5, 1e-4);
  EXPECT_EQ(r.over_threshold, 0) << "worst " << r.worst_parameter << " rel " << r.max_rel_error;
}

TEST(JointHead, DropoutOnlyWithRng) {
  JointHeadConfig c = tiny_config();
  c.dropout = 0.5;
  JointHead head(c, 8);
  Rng rng(8), drop(9);
  const auto a = random_vec(64, rng), b = random_vec(64, rng), x = random_vec(64, rng);
  EXPECT_EQ(head.forward({a, b, x}).element_logits, head.forward({a, b, x}).element_logits);
  EXPECT_NE(head.forward({a, b, x}, nullptr, &drop).element_logits, head.forward({a, b, x}).element_logits);
}

TEST(JointHead, InvalidConfig) {
  JointHeadConfig c = tiny_config();
  c.fusion_dim = 0;
  EXPECT_THROW(JointHead(c, 1), Error);
  c = tiny_config();
  c.dropout = 1.0;
  EXPECT_THROW(JointHead(c, 1), Error);
}

}  // namespace
}  // namespace hieract
