#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hieract/taxonomy.hpp"
#include "hieract/tensor.hpp"

namespace hieract {

/// Per-pathway temporal sampling: T frames with a fixed stride, square crop.
struct SamplingSpec {
  int num_frames = 1;
  int interval = 1;
  int crop_size = 224;
  Level level = Level::kEvent;

  /// Source frames covered by one clip: (T - 1) * interval + 1.
  int span() const { return (num_frames - 1) * interval + 1; }
  void validate() const;

  friend bool operator==(const SamplingSpec&, const SamplingSpec&) = default;
};

/// Default rates: event T=4/16, set T=8/8 (or T=16/4), element T=32/2, crop 224.
SamplingSpec default_sampling_spec(Level level, bool dense_set = false);

enum class SamplingMode { kTrainRandom, kTestCenter, kTestMulti };

struct ClipSelection {
  SamplingMode mode = SamplingMode::kTestCenter;
  int clips = 1;

  static ClipSelection train_random() { return {SamplingMode::kTrainRandom, 1}; }
  static ClipSelection test_center() { return {SamplingMode::kTestCenter, 1}; }
  static ClipSelection test_multi(int k) { return {SamplingMode::kTestMulti, k}; }
};

struct FrameIndexPlan {
  std::vector<std::vector<int>> clips;
  std::vector<int> starts;
  SamplingMode mode = SamplingMode::kTestCenter;
};

/// Resolves frame indices for one pathway. train_random draws the start
/// uniformly from [0, max(0, N - span)] using a stream derived from `seed`;
/// test modes ignore `seed`. Indices past the end are clamped to N - 1.
FrameIndexPlan plan_indices(int source_frame_count, const SamplingSpec& spec,
                            ClipSelection selection, std::uint64_t seed);

/// The shared-anchor random position in [0, 1) for a sample seed.
double temporal_anchor(std::uint64_t seed);

/// One decoded RGB frame, row-major HWC, 8 bits per channel.
struct Frame {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t at(int y, int x, int c) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

struct PixelNormalization {
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> stddev{0.229, 0.224, 0.225};

  friend bool operator==(const PixelNormalization&, const PixelNormalization&) = default;
};

struct PreprocessConfig {
  int scale = 256;  // shorter side after rescale
  PixelNormalization normalization;

  friend bool operator==(const PreprocessConfig&, const PreprocessConfig&) = default;
};

enum class CropMode { kCenter, kRandom };

struct CropOffset {
  int y = 0;
  int x = 0;
  friend bool operator==(const CropOffset&, const CropOffset&) = default;
};

/// Crop placement inside a (height, width) frame.
CropOffset crop_offset(int height, int width, int crop_size, CropMode mode, std::uint64_t seed);

/// Bilinear shorter-side rescale; identity when the shorter side already matches.
Frame rescale_shorter_side(const Frame& frame, int target);

/// Rescale, crop (one offset shared by all frames) and normalise.
/// Returns a [T, crop, crop, 3] tensor.
Tensor crop_and_scale(std::span<const Frame> frames, int crop_size, const PreprocessConfig& config,
                      CropMode mode, std::uint64_t seed, CropOffset* offset_used = nullptr);

}  // namespace hieract
