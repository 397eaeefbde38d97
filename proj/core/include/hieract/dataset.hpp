#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hieract/sampling.hpp"
#include "hieract/taxonomy.hpp"

namespace hieract {

/// One manifest line: clip_path, source_frame_count, event_id, set_id, element_id.
struct ManifestRecord {
  std::string clip_path;
  int source_frame_count = 0;
  LabelTriple labels;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

std::vector<ManifestRecord> parse_manifest_records(std::istream& in);
void write_manifest_records(std::ostream& out, const std::vector<ManifestRecord>& records);

struct Manifest {
  std::filesystem::path base_dir;  // relative clip paths resolve against this
  std::vector<ManifestRecord> records;

  static Manifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::filesystem::path resolve(std::size_t index) const;
  std::size_t size() const noexcept { return records.size(); }
};

/// Every row must carry a taxonomy-consistent triple.
void validate_manifest(const Manifest& manifest, const Taxonomy& taxonomy);

/// Decoded clips held in memory; decoding is lazy or bulk (parallel).
class ClipStore {
 public:
  explicit ClipStore(Manifest manifest);

  const Manifest& manifest() const noexcept { return manifest_; }
  std::size_t size() const noexcept { return manifest_.size(); }
  const ManifestRecord& record(std::size_t i) const { return manifest_.records.at(i); }

  /// Decodes every clip using `workers` threads; order of results is fixed by index.
  void preload(int workers);
  /// Thread-safe; decodes on first access.
  const std::vector<Frame>& frames(std::size_t index) const;
  /// Frames actually available for sampling (min of manifest count and decoded count).
  int frame_count(std::size_t index) const;

 private:
  Manifest manifest_;
  mutable std::vector<std::unique_ptr<std::vector<Frame>>> clips_;
  mutable std::vector<std::unique_ptr<std::once_flag>> once_;
};

/// Worker count from HIERACT_WORKERS (default 1).
int worker_count_from_env();

}  // namespace hieract
