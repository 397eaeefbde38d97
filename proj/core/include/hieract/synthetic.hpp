#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hieract/dataset.hpp"
#include "hieract/sampling.hpp"
#include "hieract/taxonomy.hpp"

namespace hieract {

enum class ClipStorage { kFrameDirectory, kY4m };

/// Shape of a generated hierarchical video dataset.
///
/// Cues are level-separable: the event fixes the background colour family,
/// the set fixes the object shape and motion axis, and the element fixes the
/// oscillation frequency. Phase is random per clip, so a single frame carries
/// no information about the element beyond its set.
struct SynthSpec {
  int events = 2;
  int sets = 4;
  int elements = 8;
  std::vector<int> set_parents;      // event of each set; empty = contiguous even split
  std::vector<int> element_parents;  // set of each element; empty = contiguous even split
  int clips_per_element = 30;
  int frames_per_clip = 80;
  int frame_size = 32;
  double noise_level = 0.1;
  std::uint64_t seed = 0;
  double train_fraction = 2.0 / 3.0;
  ClipStorage storage = ClipStorage::kFrameDirectory;

  /// Parent maps after filling defaults.
  std::vector<int> resolved_set_parents() const;
  std::vector<int> resolved_element_parents() const;
  Taxonomy taxonomy() const;
  /// Throws kInvalidArgument for unsatisfiable specs.
  void validate(int required_span = 63) const;

  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

/// Oscillation frequency (cycles per source frame) of each element.
std::vector<double> element_frequencies(const SynthSpec& spec);

/// Motion codes distinguishable among siblings at a noise level.
int max_motion_codes(double noise_level);

/// Background colour of an event at zero noise.
std::array<std::uint8_t, 3> event_background(int event_id, int event_count);

struct SynthDataset {
  std::filesystem::path taxonomy_path;
  std::filesystem::path manifest_path;        // all rows
  std::filesystem::path train_manifest_path;
  std::filesystem::path test_manifest_path;
  Manifest manifest;
};

/// Renders every clip of one element instance; deterministic given (spec.seed, clip_index).
std::vector<Frame> render_clip(const SynthSpec& spec, const LabelTriple& labels, int clip_index);

/// Writes taxonomy.tsv, manifest.tsv, train.tsv, test.tsv and clips/ under `output_dir`.
SynthDataset generate(const SynthSpec& spec, const std::filesystem::path& output_dir, int workers = 1);

}  // namespace hieract
