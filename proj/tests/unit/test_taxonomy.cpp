#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hieract/error.hpp"
#include "hieract/taxonomy.hpp"
#include "test_support.hpp"

namespace hieract {
namespace {

using testing::balanced_records;
using testing::random_records;

// Walks the parent links directly from the records; shares no code with Taxonomy.
LabelTriple walk_parents(const std::vector<TaxonomyRecord>& records, int element) {
  auto parent_of = [&](Level level, int id) {
    for (const auto& r : records)
      if (r.level == level && r.id == id) return *r.parent_id;
    return -1;
  };
  const int set = parent_of(Level::kElement, element);
  return {parent_of(Level::kSet, set), set, element};
}

void expect_data_error(const std::vector<TaxonomyRecord>& records, const std::string& fragment) {
  try {
    build_taxonomy(records);
    FAIL() << "expected a data error containing '" << fragment << "'";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kData);
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(Taxonomy, Gym99FileHasPaperCounts) {
  const Taxonomy t = load_taxonomy(HIERACT_SOURCE_DIR "/data/gym99_taxonomy.tsv");
  EXPECT_EQ(t.counts(), (std::array<int, 3>{4, 15, 99}));
}

TEST(Taxonomy, MinimalChain) {
  const Taxonomy t = build_taxonomy(balanced_records(1, 1, 1));
  EXPECT_EQ(t.counts(), (std::array<int, 3>{1, 1, 1}));
  EXPECT_EQ(lift(0, t), (LabelTriple{0, 0, 0}));
}

TEST(Taxonomy, DanglingParentIsRejected) {
  auto records = balanced_records(1, 1, 2);
  records.back().parent_id = 7;
  expect_data_error(records, "dangling parent");
}

TEST(Taxonomy, StructuralErrors) {
  auto dup = balanced_records(1, 1, 2);
  dup.back().id = 0;
  expect_data_error(dup, "duplicate id");

  auto gap = balanced_records(1, 1, 2);
  gap.back().id = 5;
  expect_data_error(gap, "non-contiguous");

  auto no_sets = balanced_records(1, 1, 1);
  std::erase_if(no_sets, [](const TaxonomyRecord& r) { return r.level != Level::kEvent; });
  expect_data_error(no_sets, "empty level");

  auto orphan_event = balanced_records(1, 1, 1);
  orphan_event.front().parent_id = 0;
  expect_data_error(orphan_event, "must not have a parent");
}

TEST(Taxonomy, LiftOnConstructedTree) {
  // elements {0,1} -> set 0, {2} -> set 1, sets {0,1} -> event 0
  const std::vector<TaxonomyRecord> records{
      {Level::kEvent, 0, "e", std::nullopt}, {Level::kSet, 0, "s0", 0},     {Level::kSet, 1, "s1", 0},
      {Level::kElement, 0, "a", 0},          {Level::kElement, 1, "b", 0}, {Level::kElement, 2, "c", 1}};
  const Taxonomy t = build_taxonomy(records);
  EXPECT_EQ(lift(2, t), (LabelTriple{0, 1, 2}));
  EXPECT_EQ(lift(2, t), walk_parents(records, 2));
}

TEST(Taxonomy, LiftOutOfRangeOnGym99) {
  const Taxonomy t = load_taxonomy(HIERACT_SOURCE_DIR "/data/gym99_taxonomy.tsv");
  EXPECT_NO_THROW(lift(98, t));
  try {
    lift(99, t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kInvalidArgument);
  }
}

TEST(Taxonomy, WrongSetToEventIsInvalid) {
  const Taxonomy t = build_taxonomy(balanced_records(2, 2, 2));
  LabelTriple triple = lift(0, t);
  EXPECT_TRUE(validate_triple(triple, t));
  triple.event_id = 1;
  EXPECT_FALSE(validate_triple(triple, t));
  EXPECT_FALSE(validate_triple({0, 0, 99}, t));
  EXPECT_FALSE(validate_triple({-1, 0, 0}, t));
}

TEST(TaxonomyProperty, LiftIsValidAndMatchesParentWalk) {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const auto records = random_records(rng);
    const Taxonomy t = build_taxonomy(records);
    for (int e = 0; e < t.count(Level::kElement); ++e) {
      EXPECT_TRUE(validate_triple(lift(e, t), t));
      EXPECT_EQ(lift(e, t), walk_parents(records, e));
    }
  }
}

TEST(TaxonomyProperty, ExhaustiveEnumerationAcceptsExactlyOneTriplePerElement) {
  Rng rng(202);
  for (int trial = 0; trial < 50; ++trial) {
    const Taxonomy t = build_taxonomy(random_records(rng));
    int accepted = 0;
    for (int e = 0; e < t.count(Level::kEvent); ++e)
      for (int s = 0; s < t.count(Level::kSet); ++s)
        for (int x = 0; x < t.count(Level::kElement); ++x) accepted += validate_triple({e, s, x}, t) ? 1 : 0;
    EXPECT_EQ(accepted, t.count(Level::kElement));
  }
}

TEST(TaxonomyProperty, BuildIgnoresRecordOrder) {
  Rng rng(303);
  for (int trial = 0; trial < 50; ++trial) {
    auto records = random_records(rng);
    const Taxonomy a = build_taxonomy(records);
    for (std::size_t i = records.size(); i > 1; --i)
      std::swap(records[i - 1], records[uniform_below(rng, i)]);
    EXPECT_EQ(a, build_taxonomy(records));
  }
}

TEST(Taxonomy, ChildrenAndParents) {
  const Taxonomy t = build_taxonomy(balanced_records(2, 2, 3));
  EXPECT_EQ(t.children(Level::kEvent, 1), (std::vector<int>{2, 3}));
  EXPECT_EQ(t.children(Level::kSet, 1), (std::vector<int>{3, 4, 5}));
  EXPECT_EQ(t.parent(Level::kElement, 5), 1);
  EXPECT_EQ(t.parent(Level::kSet, 3), 1);
}

TEST(TaxonomyIo, RoundTripThroughTsv) {
  Rng rng(404);
  const Taxonomy t = build_taxonomy(random_records(rng));
  std::stringstream ss;
  write_taxonomy_records(ss, t.records());
  EXPECT_EQ(build_taxonomy(parse_taxonomy_records(ss)), t);
}

TEST(TaxonomyIo, MalformedLinesAreDataErrors) {
  std::stringstream bad("# header\nevent\t0\tonly-three\n");
  EXPECT_THROW(parse_taxonomy_records(bad), Error);
  std::stringstream level("galaxy\t0\tx\t\n");
  EXPECT_THROW(parse_taxonomy_records(level), Error);
}

TEST(TaxonomyIo, NormalizeSparseIds) {
  const std::vector<TaxonomyRecord> sparse{{Level::kEvent, 10, "e10", std::nullopt},
                                           {Level::kEvent, 3, "e3", std::nullopt},
                                           {Level::kSet, 40, "s40", 10},
                                           {Level::kSet, 7, "s7", 3},
                                           {Level::kElement, 900, "x900", 40},
                                           {Level::kElement, 5, "x5", 7}};
  IdMapping mapping;
  const Taxonomy t = build_taxonomy(normalize_ids(sparse, &mapping));
  EXPECT_EQ(t.counts(), (std::array<int, 3>{2, 2, 2}));
  EXPECT_EQ(mapping.to_dense[level_index(Level::kEvent)].at(10), 1);
  EXPECT_EQ(mapping.to_dense[level_index(Level::kElement)].at(900), 1);
  EXPECT_EQ(lift(1, t), (LabelTriple{1, 1, 1}));
  EXPECT_EQ(t.elements()[1].name, "x900");
}

TEST(Taxonomy, LevelNames) {
  for (Level l : kAllLevels) EXPECT_EQ(parse_level(level_name(l)), l);
  EXPECT_THROW(parse_level("galaxy"), Error);
}

}  // namespace
}  // namespace hieract
