#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "hieract/checkpoint.hpp"
#include "expect_error.hpp"
#include "test_support.hpp"

namespace hieract {
namespace {

using testing::expect_error;
using testing::TempDir;

Checkpoint sample_checkpoint(Rng& rng) {
  Checkpoint c;
  c.kind = "base";
  c.metadata_json = R"({"level":"set","note":[1,2,3]})";
  for (int k = 0; k < 4; ++k) {
    Tensor t({1 + k, 2, 3});
    for (double& x : t.storage()) x = standard_normal(rng);
    c.tensors.emplace_back((k < 2 ? "pathway/t" : "classifier/t") + std::to_string(k), std::move(t));
  }
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Checkpoint, RoundTripIsBitExact) {
  TempDir dir("ckpt");
  Rng rng(5);
  const Checkpoint c = sample_checkpoint(rng);
  write_checkpoint(dir / "a.ckpt", c);
  const Checkpoint r = read_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(r.kind, "base");
  EXPECT_EQ(r.metadata_json, R"({"level":"set","note":[1,2,3]})");
  ASSERT_EQ(r.tensors.size(), c.tensors.size());
  for (std::size_t i = 0; i < c.tensors.size(); ++i) {
    EXPECT_EQ(r.tensors[i].first, c.tensors[i].first);
    EXPECT_EQ(r.tensors[i].second, c.tensors[i].second);
  }
  EXPECT_EQ(r.digest(), c.digest());
  EXPECT_EQ(r.digest("pathway/"), c.digest("pathway/"));
  EXPECT_NE(c.digest("pathway/"), c.digest("classifier/"));
  EXPECT_FALSE(std::filesystem::exists(dir / "a.ckpt.tmp"));
}

TEST(Checkpoint, DigestMatchesParamStore) {
  Rng rng(6);
  ParamStore s;
  for (int k = 0; k < 3; ++k) {
    Tensor t({3, 2});
    for (double& x : t.storage()) x = standard_normal(rng);
    s.add("z" + std::to_string(2 - k), t);  // inserted out of name order
  }
  Checkpoint c;
  append_params(c, s);
  EXPECT_EQ(c.digest(), s.digest());
  std::map<std::string, const Tensor*> named;
  for (const auto& p : s.entries()) named[p.name] = &p.value;
  EXPECT_EQ(digest_named_tensors(named), s.digest());
}

TEST(Checkpoint, TamperedPayloadIsRejected) {
  TempDir dir("ckpt");
  Rng rng(7);
  write_checkpoint(dir / "a.ckpt", sample_checkpoint(rng));
  std::string blob = slurp(dir / "a.ckpt");
  blob[blob.size() - 3] = static_cast<char>(blob[blob.size() - 3] ^ 0x5a);
  std::ofstream(dir / "a.ckpt", std::ios::binary) << blob;
  expect_error([&] { read_checkpoint(dir / "a.ckpt"); }, ErrorCategory::kCheckpoint, "digest mismatch");
}

TEST(Checkpoint, MissingAndCorruptFiles) {
  TempDir dir("ckpt");
  expect_error([&] { read_checkpoint(dir / "nope.ckpt"); }, ErrorCategory::kCheckpoint, "missing checkpoint");
  std::ofstream(dir / "junk.ckpt") << "not a checkpoint\n";
  expect_error([&] { read_checkpoint(dir / "junk.ckpt"); }, ErrorCategory::kCheckpoint, "corrupt checkpoint");

  Rng rng(8);
  write_checkpoint(dir / "t.ckpt", sample_checkpoint(rng));
  const std::string blob = slurp(dir / "t.ckpt");
  std::ofstream(dir / "t.ckpt", std::ios::binary) << blob.substr(0, blob.size() - 100);
  expect_error([&] { read_checkpoint(dir / "t.ckpt"); }, ErrorCategory::kCheckpoint, "truncated");
}

TEST(Checkpoint, LoadParamsChecksNamesAndShapes) {
  Rng rng(9);
  ParamStore s;
  s.add("a", Tensor({2, 2}, 1.0));
  Checkpoint c;
  append_params(c, s);
  ParamStore same;
  same.add("a", Tensor({2, 2}));
  load_params(c, same);
  EXPECT_EQ(same.value(0), s.value(0));

  ParamStore wrong_shape;
  wrong_shape.add("a", Tensor({4}));
  expect_error([&] { load_params(c, wrong_shape); }, ErrorCategory::kCheckpoint, "shape");
  ParamStore wrong_name;
  wrong_name.add("b", Tensor({2, 2}));
  expect_error([&] { load_params(c, wrong_name); }, ErrorCategory::kCheckpoint, "no tensor b");
}

TEST(Checkpoint, AtomicWriteReplacesWholeFile) {
  TempDir dir("ckpt");
  write_file_atomic(dir / "f.txt", std::string(1000, 'x'));
  write_file_atomic(dir / "f.txt", "short");
  EXPECT_EQ(slurp(dir / "f.txt"), "short");
  for (const auto& e : std::filesystem::directory_iterator(dir.path()))
    EXPECT_EQ(e.path().filename(), "f.txt");
}

}  // namespace
}  // namespace hieract
