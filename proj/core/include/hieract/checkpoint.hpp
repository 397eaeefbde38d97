#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hieract/params.hpp"
#include "hieract/tensor.hpp"

namespace hieract {

/// Self-describing parameter container.
///
/// Layout: the magic line "HIERACT-CKPT 1", a decimal header length line, a
/// JSON header (kind, free-form metadata object, tensor index with shape,
/// byte offset and SHA-256 per tensor), then little-endian float64 payload.
/// Tensor names are hierarchical ("pathway/stem/weight", "head/fusion/bias"),
/// so each namespace can be hashed on its own.
struct Checkpoint {
  std::string kind;                    // "base" or "joint"
  std::string metadata_json = "{}";    // JSON object text
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
  /// Digest over every tensor whose name starts with `prefix` (all when empty).
  std::string digest(const std::string& prefix = "") const;
};

/// Atomic: writes to a sibling temp file, then renames.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Verifies the per-tensor digests; corruption raises a kCheckpoint error.
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Same digest as ParamStore::digest for identically named tensors.
std::string digest_named_tensors(const std::map<std::string, const Tensor*>& tensors);

void append_params(Checkpoint& checkpoint, const ParamStore& store);
/// Copies tensors into a store with matching names and shapes.
void load_params(const Checkpoint& checkpoint, ParamStore& store);

/// Writes `data` to `path` via temp-file-then-rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& data);

}  // namespace hieract
