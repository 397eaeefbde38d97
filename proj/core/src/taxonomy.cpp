#include "hieract/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "hieract/error.hpp"

namespace hieract {
namespace {

void data_error(const std::string& msg) { fail(ErrorCategory::kData, "taxonomy: " + msg); }

int parse_int(const std::string& text, const std::string& what, int line) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    data_error("line " + std::to_string(line) + ": invalid " + what + " '" + text + "'");
  return v;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

}  // namespace

std::string_view level_name(Level level) {
  switch (level) {
    case Level::kEvent: return "event";
    case Level::kSet: return "set";
    case Level::kElement: return "element";
  }
  return "?";
}

Level parse_level(std::string_view text) {
  if (text == "event") return Level::kEvent;
  if (text == "set") return Level::kSet;
  if (text == "element") return Level::kElement;
  fail(ErrorCategory::kInvalidArgument, "unknown level '" + std::string(text) + "'");
}

int LabelTriple::at(Level level) const {
  switch (level) {
    case Level::kEvent: return event_id;
    case Level::kSet: return set_id;
    case Level::kElement: return element_id;
  }
  return -1;
}

Taxonomy Taxonomy::build(std::vector<TaxonomyRecord> records) {
  Taxonomy tax;
  for (auto& r : records) {
    tax.levels_[level_index(r.level)].push_back(
        TaxonomyNode{r.id, std::move(r.name), r.level, r.parent_id});
  }
  for (Level level : kAllLevels) {
    auto& nodes = tax.levels_[level_index(level)];
    const std::string lname(level_name(level));
    if (nodes.empty()) data_error("empty level '" + lname + "'");
    std::sort(nodes.begin(), nodes.end(),
              [](const TaxonomyNode& a, const TaxonomyNode& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i > 0 && nodes[i].id == nodes[i - 1].id)
        data_error("duplicate id " + std::to_string(nodes[i].id) + " at level '" + lname + "'");
      if (nodes[i].id != static_cast<int>(i))
        data_error("non-contiguous ids at level '" + lname + "': expected " + std::to_string(i) +
                   ", found " + std::to_string(nodes[i].id));
    }
  }
  for (const auto& e : tax.events()) {
    if (e.parent_id) data_error("event " + std::to_string(e.id) + " must not have a parent");
  }
  auto check_parents = [&](Level child, Level parent) {
    const int parent_count = tax.count(parent);
    for (const auto& n : tax.nodes(child)) {
      if (!n.parent_id)
        data_error(std::string(level_name(child)) + " " + std::to_string(n.id) + " has no parent");
      if (*n.parent_id < 0 || *n.parent_id >= parent_count)
        data_error("dangling parent: " + std::string(level_name(child)) + " " +
                   std::to_string(n.id) + " references missing " +
                   std::string(level_name(parent)) + " " + std::to_string(*n.parent_id));
    }
  };
  check_parents(Level::kSet, Level::kEvent);
  check_parents(Level::kElement, Level::kSet);
  return tax;
}

std::array<int, 3> Taxonomy::counts() const {
  return {count(Level::kEvent), count(Level::kSet), count(Level::kElement)};
}

int Taxonomy::parent(Level level, int id) const {
  require(level != Level::kEvent, ErrorCategory::kInvalidArgument, "events have no parent");
  require(id >= 0 && id < count(level), ErrorCategory::kInvalidArgument,
          std::string(level_name(level)) + " id " + std::to_string(id) + " out of range");
  return *nodes(level)[static_cast<std::size_t>(id)].parent_id;
}

std::vector<int> Taxonomy::children(Level level, int id) const {
  require(level != Level::kElement, ErrorCategory::kInvalidArgument, "elements have no children");
  const Level child = level == Level::kEvent ? Level::kSet : Level::kElement;
  std::vector<int> out;
  for (const auto& n : nodes(child))
    if (n.parent_id == id) out.push_back(n.id);
  return out;
}

LabelTriple Taxonomy::lift(int element_id) const {
  require(element_id >= 0 && element_id < count(Level::kElement), ErrorCategory::kInvalidArgument,
          "element id " + std::to_string(element_id) + " out of range [0, " +
              std::to_string(count(Level::kElement)) + ")");
  LabelTriple t;
  t.element_id = element_id;
  t.set_id = parent(Level::kElement, element_id);
  t.event_id = parent(Level::kSet, t.set_id);
  return t;
}

bool Taxonomy::validate(const LabelTriple& t) const {
  if (t.event_id < 0 || t.event_id >= count(Level::kEvent)) return false;
  if (t.set_id < 0 || t.set_id >= count(Level::kSet)) return false;
  if (t.element_id < 0 || t.element_id >= count(Level::kElement)) return false;
  return parent(Level::kElement, t.element_id) == t.set_id &&
         parent(Level::kSet, t.set_id) == t.event_id;
}

std::vector<TaxonomyRecord> Taxonomy::records() const {
  std::vector<TaxonomyRecord> out;
  for (Level level : kAllLevels)
    for (const auto& n : nodes(level)) out.push_back({level, n.id, n.name, n.parent_id});
  return out;
}

Taxonomy build_taxonomy(std::vector<TaxonomyRecord> records) {
  return Taxonomy::build(std::move(records));
}

LabelTriple lift(int element_id, const Taxonomy& taxonomy) { return taxonomy.lift(element_id); }

bool validate_triple(const LabelTriple& triple, const Taxonomy& taxonomy) {
  return taxonomy.validate(triple);
}

std::vector<TaxonomyRecord> parse_taxonomy_records(std::istream& in) {
  std::vector<TaxonomyRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 4)
      data_error("line " + std::to_string(lineno) + ": expected 4 tab-separated fields, got " +
                 std::to_string(fields.size()));
    TaxonomyRecord r;
    try {
      r.level = parse_level(fields[0]);
    } catch (const Error&) {
      data_error("line " + std::to_string(lineno) + ": unknown level '" + fields[0] + "'");
    }
    r.id = parse_int(fields[1], "id", lineno);
    r.name = fields[2];
    if (!fields[3].empty()) r.parent_id = parse_int(fields[3], "parent_id", lineno);
    records.push_back(std::move(r));
  }
  return records;
}

void write_taxonomy_records(std::ostream& out, const std::vector<TaxonomyRecord>& records) {
  out << "# level\tid\tname\tparent_id\n";
  for (const auto& r : records) {
    out << level_name(r.level) << '\t' << r.id << '\t' << r.name << '\t';
    if (r.parent_id) out << *r.parent_id;
    out << '\n';
  }
}

std::vector<TaxonomyRecord> normalize_ids(const std::vector<TaxonomyRecord>& records,
                                          IdMapping* mapping) {
  IdMapping local;
  IdMapping& m = mapping ? *mapping : local;
  for (auto& level_map : m.to_dense) level_map.clear();
  std::array<std::set<int>, 3> ids;
  for (const auto& r : records) {
    if (!ids[level_index(r.level)].insert(r.id).second)
      data_error("duplicate id " + std::to_string(r.id) + " at level '" +
                 std::string(level_name(r.level)) + "'");
  }
  for (std::size_t l = 0; l < 3; ++l) {
    int next = 0;
    for (int id : ids[l]) m.to_dense[l].emplace(id, next++);
  }
  std::vector<TaxonomyRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    TaxonomyRecord n = r;
    n.id = m.to_dense[level_index(r.level)].at(r.id);
    if (r.parent_id && r.level != Level::kEvent) {
      const auto& parents = m.to_dense[level_index(r.level) - 1];
      auto it = parents.find(*r.parent_id);
      if (it == parents.end())
        data_error("dangling parent: " + std::string(level_name(r.level)) + " " +
                   std::to_string(r.id) + " references missing id " + std::to_string(*r.parent_id));
      n.parent_id = it->second;
    }
    out.push_back(std::move(n));
  }
  return out;
}

void write_id_mapping(std::ostream& out, const IdMapping& mapping) {
  out << "# level\tsource_id\tdense_id\n";
  for (Level level : kAllLevels)
    for (const auto& [src, dense] : mapping.to_dense[level_index(level)])
      out << level_name(level) << '\t' << src << '\t' << dense << '\n';
}

Taxonomy load_taxonomy(const std::filesystem::path& path, bool normalize, IdMapping* mapping) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open taxonomy file " + path.string());
  auto records = parse_taxonomy_records(in);
  if (normalize) records = normalize_ids(records, mapping);
  return build_taxonomy(std::move(records));
}

void save_taxonomy(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write taxonomy file " + path.string());
  write_taxonomy_records(out, taxonomy.records());
}

}  // namespace hieract
