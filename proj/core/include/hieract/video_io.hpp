#pragma once

#include <filesystem>
#include <vector>

#include "hieract/sampling.hpp"

namespace hieract {

Frame read_ppm(const std::filesystem::path& path);
/// Writes binary P6; the temp-file-then-rename keeps partially written frames invisible.
void write_ppm(const std::filesystem::path& path, const Frame& frame);

/// YUV4MPEG2 with C444 or 4:2:0 chroma (nearest-neighbour upsampled), BT.601 full range.
std::vector<Frame> read_y4m(const std::filesystem::path& path);
void write_y4m(const std::filesystem::path& path, const std::vector<Frame>& frames, int fps = 25);

/// Loads a clip: a directory of *.ppm frames (lexicographic order) or a
/// single video file whose decoder is chosen by extension (.y4m).
std::vector<Frame> load_clip(const std::filesystem::path& path);

/// Number of frames without decoding pixel data.
int count_clip_frames(const std::filesystem::path& path);

}  // namespace hieract
