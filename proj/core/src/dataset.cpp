#include "hieract/dataset.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include "hieract/error.hpp"
#include "hieract/video_io.hpp"

namespace hieract {
namespace fs = std::filesystem;

namespace {

int parse_field(const std::string& text, int line, const char* what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used != 0 && used == text.size(), ErrorCategory::kData,
          "manifest line " + std::to_string(line) + ": invalid " + what + " '" + text + "'");
  return v;
}

}  // namespace

std::vector<ManifestRecord> parse_manifest_records(std::istream& in) {
  std::vector<ManifestRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      auto pos = line.find('\t', start);
      f.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    require(f.size() == 5, ErrorCategory::kData,
            "manifest line " + std::to_string(lineno) + ": expected 5 tab-separated fields");
    ManifestRecord r;
    r.clip_path = f[0];
    r.source_frame_count = parse_field(f[1], lineno, "source_frame_count");
    require(r.source_frame_count >= 1, ErrorCategory::kData,
            "manifest line " + std::to_string(lineno) + ": source_frame_count must be >= 1");
    r.labels = {parse_field(f[2], lineno, "event_id"), parse_field(f[3], lineno, "set_id"),
                parse_field(f[4], lineno, "element_id")};
    out.push_back(std::move(r));
  }
  return out;
}

void write_manifest_records(std::ostream& out, const std::vector<ManifestRecord>& records) {
  out << "# clip_path\tsource_frame_count\tevent_id\tset_id\telement_id\n";
  for (const auto& r : records)
    out << r.clip_path << '\t' << r.source_frame_count << '\t' << r.labels.event_id << '\t'
        << r.labels.set_id << '\t' << r.labels.element_id << '\n';
}

Manifest Manifest::load(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open manifest " + path.string());
  Manifest m;
  m.base_dir = fs::absolute(path).parent_path();
  m.records = parse_manifest_records(in);
  return m;
}

void Manifest::save(const fs::path& path) const {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write manifest " + path.string());
  write_manifest_records(out, records);
}

fs::path Manifest::resolve(std::size_t index) const {
  fs::path p(records.at(index).clip_path);
  return p.is_absolute() ? p : base_dir / p;
}

void validate_manifest(const Manifest& manifest, const Taxonomy& taxonomy) {
  require(!manifest.records.empty(), ErrorCategory::kData, "empty dataset");
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& t = manifest.records[i].labels;
    require(taxonomy.validate(t), ErrorCategory::kData,
            "inconsistent LabelTriple (" + std::to_string(t.event_id) + ", " + std::to_string(t.set_id) +
                ", " + std::to_string(t.element_id) + ") for clip " + manifest.records[i].clip_path);
  }
}

ClipStore::ClipStore(Manifest manifest) : manifest_(std::move(manifest)) {
  clips_.resize(manifest_.size());
  for (std::size_t i = 0; i < manifest_.size(); ++i) once_.push_back(std::make_unique<std::once_flag>());
}

const std::vector<Frame>& ClipStore::frames(std::size_t index) const {
  std::call_once(*once_.at(index), [&] {
    clips_[index] = std::make_unique<std::vector<Frame>>(load_clip(manifest_.resolve(index)));
  });
  return *clips_[index];
}

int ClipStore::frame_count(std::size_t index) const {
  return std::min(record(index).source_frame_count, static_cast<int>(frames(index).size()));
}

void ClipStore::preload(int workers) {
  workers = std::max(1, workers);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    try {
      for (std::size_t i = next++; i < size(); i = next++) frames(i);
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int worker_count_from_env() {
  if (const char* v = std::getenv("HIERACT_WORKERS")) {
    try {
      return std::max(1, std::stoi(v));
    } catch (const std::exception&) {
      fail(ErrorCategory::kConfig, std::string("HIERACT_WORKERS must be an integer, got '") + v + "'");
    }
  }
  return 1;
}

}  // namespace hieract
