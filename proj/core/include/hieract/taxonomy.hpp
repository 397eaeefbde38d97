#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hieract {

enum class Level { kEvent = 0, kSet = 1, kElement = 2 };

inline constexpr std::array<Level, 3> kAllLevels{Level::kEvent, Level::kSet, Level::kElement};
inline constexpr std::size_t kNumLevels = 3;

constexpr std::size_t level_index(Level level) { return static_cast<std::size_t>(level); }
std::string_view level_name(Level level);
/// Accepts "event", "set", "element"; throws kInvalidArgument otherwise.
Level parse_level(std::string_view text);

struct TaxonomyNode {
  int id = 0;
  std::string name;
  Level level = Level::kEvent;
  std::optional<int> parent_id;  // absent for events

  friend bool operator==(const TaxonomyNode&, const TaxonomyNode&) = default;
};

/// One line of a taxonomy file.
struct TaxonomyRecord {
  Level level = Level::kEvent;
  int id = 0;
  std::string name;
  std::optional<int> parent_id;
};

struct LabelTriple {
  int event_id = 0;
  int set_id = 0;
  int element_id = 0;

  int at(Level level) const;
  friend bool operator==(const LabelTriple&, const LabelTriple&) = default;
};

/// Validated, immutable event <- set <- element forest with dense per-level ids.
class Taxonomy {
 public:
  /// Validates and materialises records. Record order does not matter.
  static Taxonomy build(std::vector<TaxonomyRecord> records);

  const std::vector<TaxonomyNode>& nodes(Level level) const { return levels_[level_index(level)]; }
  const std::vector<TaxonomyNode>& events() const { return nodes(Level::kEvent); }
  const std::vector<TaxonomyNode>& sets() const { return nodes(Level::kSet); }
  const std::vector<TaxonomyNode>& elements() const { return nodes(Level::kElement); }

  int count(Level level) const { return static_cast<int>(nodes(level).size()); }
  std::array<int, 3> counts() const;
  /// Parent id at the level above; throws for events or out-of-range ids.
  int parent(Level level, int id) const;
  std::vector<int> children(Level level, int id) const;

  /// Element id -> the unique consistent triple.
  LabelTriple lift(int element_id) const;
  /// True iff both parent links hold; out-of-range ids yield false.
  bool validate(const LabelTriple& triple) const;

  std::vector<TaxonomyRecord> records() const;

  friend bool operator==(const Taxonomy&, const Taxonomy&) = default;

 private:
  std::array<std::vector<TaxonomyNode>, 3> levels_;
};

Taxonomy build_taxonomy(std::vector<TaxonomyRecord> records);
LabelTriple lift(int element_id, const Taxonomy& taxonomy);
bool validate_triple(const LabelTriple& triple, const Taxonomy& taxonomy);

/// Tab-separated `level id name parent_id`; '#' comments and blank lines ignored.
std::vector<TaxonomyRecord> parse_taxonomy_records(std::istream& in);
void write_taxonomy_records(std::ostream& out, const std::vector<TaxonomyRecord>& records);

/// Source-id -> dense-id map produced when ingesting sparse ids.
struct IdMapping {
  std::array<std::map<int, int>, 3> to_dense;
};

/// Re-indexes records whose ids are unique within a level but sparse or
/// unordered to dense 0-based ids (ascending source order).
std::vector<TaxonomyRecord> normalize_ids(const std::vector<TaxonomyRecord>& records,
                                          IdMapping* mapping);
void write_id_mapping(std::ostream& out, const IdMapping& mapping);

Taxonomy load_taxonomy(const std::filesystem::path& path, bool normalize = false,
                       IdMapping* mapping = nullptr);
void save_taxonomy(const std::filesystem::path& path, const Taxonomy& taxonomy);

}  // namespace hieract
