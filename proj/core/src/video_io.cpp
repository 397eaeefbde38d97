#include "hieract/video_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hieract/error.hpp"

namespace hieract {
namespace fs = std::filesystem;
namespace {

void skip_ws_and_comments(std::istream& in) {
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string dummy;
      std::getline(in, dummy);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_header_int(std::istream& in, const fs::path& path) {
  skip_ws_and_comments(in);
  int v = -1;
  in >> v;
  require(static_cast<bool>(in) && v >= 0, ErrorCategory::kData, "unreadable frame " + path.string());
  return v;
}

std::uint8_t clamp_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::vector<fs::path> frame_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

struct Y4mHeader {
  int width = 0;
  int height = 0;
  bool chroma_420 = true;
  std::streampos data_start;
};

Y4mHeader read_y4m_header(std::ifstream& in, const fs::path& path) {
  std::string line;
  std::getline(in, line);
  require(line.rfind("YUV4MPEG2", 0) == 0, ErrorCategory::kData, "not a y4m file: " + path.string());
  Y4mHeader h;
  std::istringstream tokens(line.substr(9));
  std::string tok;
  while (tokens >> tok) {
    if (tok[0] == 'W') h.width = std::stoi(tok.substr(1));
    else if (tok[0] == 'H') h.height = std::stoi(tok.substr(1));
    else if (tok[0] == 'C') {
      const std::string cs = tok.substr(1);
      if (cs.rfind("444", 0) == 0) h.chroma_420 = false;
      else if (cs.rfind("420", 0) == 0) h.chroma_420 = true;
      else fail(ErrorCategory::kData, "unsupported y4m colorspace " + cs + " in " + path.string());
    }
  }
  require(h.width >= 1 && h.height >= 1, ErrorCategory::kData, "frame smaller than 1 px in " + path.string());
  h.data_start = in.tellg();
  return h;
}

std::size_t y4m_frame_bytes(const Y4mHeader& h) {
  const std::size_t luma = static_cast<std::size_t>(h.width) * h.height;
  if (!h.chroma_420) return luma * 3;
  const std::size_t cw = (h.width + 1) / 2, ch = (h.height + 1) / 2;
  return luma + 2 * cw * ch;
}

}  // namespace

Frame read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kData, "unreadable frame " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  require(magic == "P6", ErrorCategory::kData, "unreadable frame (not binary PPM) " + path.string());
  Frame f;
  f.width = read_header_int(in, path);
  f.height = read_header_int(in, path);
  const int maxval = read_header_int(in, path);
  require(maxval == 255, ErrorCategory::kData, "unsupported PPM maxval in " + path.string());
  in.get();
  require(f.width >= 1 && f.height >= 1, ErrorCategory::kData, "frame smaller than 1 px: " + path.string());
  f.rgb.resize(static_cast<std::size_t>(f.width) * f.height * 3);
  in.read(reinterpret_cast<char*>(f.rgb.data()), static_cast<std::streamsize>(f.rgb.size()));
  require(static_cast<std::size_t>(in.gcount()) == f.rgb.size(), ErrorCategory::kData,
          "truncated frame " + path.string());
  return f;
}

void write_ppm(const fs::path& path, const Frame& frame) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
    out << "P6\n" << frame.width << ' ' << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.rgb.data()),
              static_cast<std::streamsize>(frame.rgb.size()));
    require(static_cast<bool>(out), ErrorCategory::kIo, "short write to " + path.string());
  }
  fs::rename(tmp, path);
}

std::vector<Frame> read_y4m(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kData, "unreadable video " + path.string());
  const Y4mHeader h = read_y4m_header(in, path);
  const std::size_t luma = static_cast<std::size_t>(h.width) * h.height;
  const int cw = h.chroma_420 ? (h.width + 1) / 2 : h.width;
  const int ch = h.chroma_420 ? (h.height + 1) / 2 : h.height;
  std::vector<std::uint8_t> buf(y4m_frame_bytes(h));
  std::vector<Frame> frames;
  std::string line;
  while (std::getline(in, line)) {
    require(line.rfind("FRAME", 0) == 0, ErrorCategory::kData, "corrupt y4m frame marker in " + path.string());
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    require(static_cast<std::size_t>(in.gcount()) == buf.size(), ErrorCategory::kData,
            "truncated y4m frame in " + path.string());
    const std::uint8_t* yp = buf.data();
    const std::uint8_t* up = yp + luma;
    const std::uint8_t* vp = up + static_cast<std::size_t>(cw) * ch;
    Frame f{h.height, h.width, std::vector<std::uint8_t>(luma * 3)};
    for (int y = 0; y < h.height; ++y) {
      for (int x = 0; x < h.width; ++x) {
        const int cy = h.chroma_420 ? y / 2 : y;
        const int cx = h.chroma_420 ? x / 2 : x;
        const double Y = yp[static_cast<std::size_t>(y) * h.width + x];
        const double U = up[static_cast<std::size_t>(cy) * cw + cx] - 128.0;
        const double V = vp[static_cast<std::size_t>(cy) * cw + cx] - 128.0;
        std::uint8_t* px = &f.rgb[(static_cast<std::size_t>(y) * h.width + x) * 3];
        px[0] = clamp_byte(Y + 1.402 * V);
        px[1] = clamp_byte(Y - 0.344136 * U - 0.714136 * V);
        px[2] = clamp_byte(Y + 1.772 * U);
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

void write_y4m(const fs::path& path, const std::vector<Frame>& frames, int fps) {
  require(!frames.empty(), ErrorCategory::kInvalidArgument, "write_y4m: no frames");
  const int w = frames[0].width, h = frames[0].height;
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  out << "YUV4MPEG2 W" << w << " H" << h << " F" << fps << ":1 Ip A1:1 C444\n";
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<std::uint8_t> planes(n * 3);
  for (const auto& f : frames) {
    require(f.width == w && f.height == h, ErrorCategory::kInvalidArgument, "write_y4m: frame size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      const double r = f.rgb[i * 3], g = f.rgb[i * 3 + 1], b = f.rgb[i * 3 + 2];
      planes[i] = clamp_byte(0.299 * r + 0.587 * g + 0.114 * b);
      planes[n + i] = clamp_byte(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b);
      planes[2 * n + i] = clamp_byte(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b);
    }
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(planes.data()), static_cast<std::streamsize>(planes.size()));
  }
}

std::vector<Frame> load_clip(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<Frame> frames;
    for (const auto& file : frame_files(path)) frames.push_back(read_ppm(file));
    require(!frames.empty(), ErrorCategory::kData, "clip directory has no frames: " + path.string());
    return frames;
  }
  require(fs::exists(path, ec), ErrorCategory::kData, "clip not found: " + path.string());
  const std::string ext = path.extension().string();
  if (ext == ".y4m") return read_y4m(path);
  if (ext == ".ppm") return {read_ppm(path)};
  fail(ErrorCategory::kData, "no decoder for clip extension '" + ext + "': " + path.string());
}

int count_clip_frames(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) return static_cast<int>(frame_files(path).size());
  if (path.extension() == ".y4m") {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCategory::kData, "unreadable video " + path.string());
    const Y4mHeader h = read_y4m_header(in, path);
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg() - h.data_start);
    return static_cast<int>(bytes / (y4m_frame_bytes(h) + 6));
  }
  return static_cast<int>(load_clip(path).size());
}

}  // namespace hieract
