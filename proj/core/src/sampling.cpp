#include "hieract/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "hieract/error.hpp"
#include "hieract/rng.hpp"

namespace hieract {
namespace {

constexpr std::uint64_t kStartStream = 1;
constexpr std::uint64_t kCropStream = 2;

}  // namespace

void SamplingSpec::validate() const {
  require(num_frames >= 1, ErrorCategory::kInvalidArgument, "sampling: num_frames must be >= 1");
  require(interval >= 1, ErrorCategory::kInvalidArgument, "sampling: interval must be >= 1");
  require(crop_size >= 1, ErrorCategory::kInvalidArgument, "sampling: crop_size must be >= 1");
}

SamplingSpec default_sampling_spec(Level level, bool dense_set) {
  switch (level) {
    case Level::kEvent: return {4, 16, 224, level};
    case Level::kSet: return dense_set ? SamplingSpec{16, 4, 224, level} : SamplingSpec{8, 8, 224, level};
    case Level::kElement: return {32, 2, 224, level};
  }
  return {};
}

double temporal_anchor(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {kStartStream}));
  return uniform01(rng);
}

FrameIndexPlan plan_indices(int n, const SamplingSpec& spec, ClipSelection selection,
                            std::uint64_t seed) {
  spec.validate();
  require(n >= 1, ErrorCategory::kInvalidArgument, "sampling: source_frame_count must be >= 1");
  require(selection.clips >= 1, ErrorCategory::kInvalidArgument, "sampling: clip count must be >= 1");

  const int max_start = std::max(0, n - spec.span());
  FrameIndexPlan plan;
  plan.mode = selection.mode;
  switch (selection.mode) {
    case SamplingMode::kTrainRandom: {
      const double u = temporal_anchor(seed);
      plan.starts.push_back(std::min(max_start, static_cast<int>(u * (max_start + 1))));
      break;
    }
    case SamplingMode::kTestCenter:
      plan.starts.push_back(max_start / 2);
      break;
    case SamplingMode::kTestMulti: {
      const int k = selection.clips;
      if (k == 1) {
        plan.starts.push_back(max_start / 2);
      } else {
        for (int i = 0; i < k; ++i)
          plan.starts.push_back(static_cast<int>(
              std::lround(static_cast<double>(i) * max_start / static_cast<double>(k - 1))));
      }
      break;
    }
  }
  for (int start : plan.starts) {
    std::vector<int> clip(static_cast<std::size_t>(spec.num_frames));
    for (int i = 0; i < spec.num_frames; ++i) clip[i] = std::min(n - 1, start + i * spec.interval);
    plan.clips.push_back(std::move(clip));
  }
  return plan;
}

CropOffset crop_offset(int height, int width, int crop_size, CropMode mode, std::uint64_t seed) {
  require(height >= crop_size && width >= crop_size, ErrorCategory::kInvalidArgument,
          "crop: frame " + std::to_string(height) + "x" + std::to_string(width) +
              " smaller than crop " + std::to_string(crop_size));
  if (mode == CropMode::kCenter) return {(height - crop_size) / 2, (width - crop_size) / 2};
  Rng rng(derive_seed(seed, {kCropStream}));
  const int y = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(height - crop_size + 1)));
  const int x = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(width - crop_size + 1)));
  return {y, x};
}

Frame rescale_shorter_side(const Frame& frame, int target) {
  require(frame.height >= 1 && frame.width >= 1, ErrorCategory::kData, "frame smaller than 1 px");
  require(target >= 1, ErrorCategory::kInvalidArgument, "rescale target must be >= 1");
  const int shorter = std::min(frame.height, frame.width);
  if (shorter == target) return frame;
  const double s = static_cast<double>(target) / shorter;
  Frame out;
  out.height = frame.height == shorter ? target : std::max(1, static_cast<int>(std::lround(frame.height * s)));
  out.width = frame.width == shorter ? target : std::max(1, static_cast<int>(std::lround(frame.width * s)));
  out.rgb.resize(static_cast<std::size_t>(out.height) * out.width * 3);
  const double sy = static_cast<double>(frame.height) / out.height;
  const double sx = static_cast<double>(frame.width) / out.width;
  for (int y = 0; y < out.height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, frame.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, frame.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out.width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, frame.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, frame.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double v = (1 - wy) * ((1 - wx) * frame.at(y0, x0, c) + wx * frame.at(y0, x1, c)) +
                         wy * ((1 - wx) * frame.at(y1, x0, c) + wx * frame.at(y1, x1, c));
        out.rgb[(static_cast<std::size_t>(y) * out.width + x) * 3 + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

Tensor crop_and_scale(std::span<const Frame> frames, int crop_size, const PreprocessConfig& config,
                      CropMode mode, std::uint64_t seed, CropOffset* offset_used) {
  require(!frames.empty(), ErrorCategory::kInvalidArgument, "crop_and_scale: no frames");
  require(crop_size >= 1, ErrorCategory::kInvalidArgument, "crop_and_scale: crop_size must be >= 1");
  const auto t_count = static_cast<std::int64_t>(frames.size());
  Tensor out({t_count, crop_size, crop_size, 3});
  CropOffset offset{};
  for (std::int64_t t = 0; t < t_count; ++t) {
    const Frame scaled = rescale_shorter_side(frames[t], config.scale);
    if (t == 0) offset = crop_offset(scaled.height, scaled.width, crop_size, mode, seed);
    require(scaled.height >= offset.y + crop_size && scaled.width >= offset.x + crop_size,
            ErrorCategory::kData, "crop_and_scale: frames within a clip differ in size");
    double* dst = out.data() + t * crop_size * crop_size * 3;
    for (int y = 0; y < crop_size; ++y) {
      for (int x = 0; x < crop_size; ++x) {
        for (int c = 0; c < 3; ++c) {
          const double v = scaled.at(offset.y + y, offset.x + x, c) / 255.0;
          *dst++ = (v - config.normalization.mean[c]) / config.normalization.stddev[c];
        }
      }
    }
  }
  if (offset_used) *offset_used = offset;
  return out;
}

}  // namespace hieract
