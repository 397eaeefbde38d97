#include "hieract/synthetic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include "hieract/error.hpp"
#include "hieract/rng.hpp"
#include "hieract/video_io.hpp"

namespace hieract {
namespace fs = std::filesystem;

namespace {

// The element pathway samples every 2 frames (Nyquist 1/4 cycle/frame); the
// event pathway every 16 (Nyquist 1/32). Frequencies live strictly between.
constexpr double kMinFrequency = 1.0 / 24.0;
constexpr double kMaxFrequency = 1.0 / 6.0;
constexpr int kNumShapes = 4;

std::vector<int> even_split(int children, int parents) {
  std::vector<int> out(static_cast<std::size_t>(children));
  for (int c = 0; c < children; ++c) out[c] = static_cast<int>(static_cast<long long>(c) * parents / children);
  return out;
}

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h * 6.0, 6.0);
  const double x = c * (1 - std::fabs(std::fmod(hp, 2.0) - 1));
  std::array<double, 3> rgb{};
  switch (static_cast<int>(hp)) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  const double m = v - c;
  for (double& ch : rgb) ch = (ch + m) * 255.0;
  return rgb;
}

/// Inside test for a shape of nominal radius r centred at the origin.
/// Codes are ordered so that siblings 0 and 1 differ most in area (disk, cross).
bool inside_shape(int shape, double dx, double dy, double r) {
  switch (shape) {
    case 0: return dx * dx + dy * dy <= r * r;  // disk
    case 1: {                                   // cross
      const double w = r * 0.35;
      return (std::fabs(dx) <= w && std::fabs(dy) <= r) || (std::fabs(dy) <= w && std::fabs(dx) <= r);
    }
    case 2: return std::fabs(dx) <= r * 0.85 && std::fabs(dy) <= r * 0.85;  // square
    default: {                                                              // triangle (apex up)
      const double y = dy + r * 0.3;
      return y <= r * 0.7 && y >= -r && std::fabs(dx) <= (r * 0.7 - y) * 0.6;
    }
  }
}

int local_index(const std::vector<int>& parents, int child) {
  int k = 0;
  for (int c = 0; c < child; ++c)
    if (parents[c] == parents[child]) ++k;
  return k;
}

int sibling_count(const std::vector<int>& parents, int child) {
  return static_cast<int>(std::count(parents.begin(), parents.end(), parents[child]));
}

}  // namespace

std::vector<int> SynthSpec::resolved_set_parents() const {
  return set_parents.empty() ? even_split(sets, events) : set_parents;
}

std::vector<int> SynthSpec::resolved_element_parents() const {
  return element_parents.empty() ? even_split(elements, sets) : element_parents;
}

Taxonomy SynthSpec::taxonomy() const {
  std::vector<TaxonomyRecord> records;
  for (int e = 0; e < events; ++e) records.push_back({Level::kEvent, e, "event_" + std::to_string(e), {}});
  const auto sp = resolved_set_parents();
  const auto ep = resolved_element_parents();
  for (int s = 0; s < sets; ++s) records.push_back({Level::kSet, s, "set_" + std::to_string(s), sp[s]});
  for (int l = 0; l < elements; ++l)
    records.push_back({Level::kElement, l, "element_" + std::to_string(l), ep[l]});
  return build_taxonomy(std::move(records));
}

int max_motion_codes(double noise_level) {
  const double min_ratio = 1.5 * (1.0 + noise_level);
  return 1 + static_cast<int>(std::floor(std::log(kMaxFrequency / kMinFrequency) / std::log(min_ratio)));
}

void SynthSpec::validate(int required_span) const {
  auto bad = [](const std::string& m) { fail(ErrorCategory::kInvalidArgument, "synth: " + m); };
  if (events < 1 || sets < events || elements < sets) bad("need 1 <= events <= sets <= elements");
  if (!set_parents.empty() && static_cast<int>(set_parents.size()) != sets) bad("set_parents length must equal sets");
  if (!element_parents.empty() && static_cast<int>(element_parents.size()) != elements)
    bad("element_parents length must equal elements");
  if (clips_per_element < 1) bad("clips_per_element must be >= 1");
  if (frames_per_clip < required_span)
    bad("frames_per_clip " + std::to_string(frames_per_clip) + " is shorter than the largest span " +
        std::to_string(required_span));
  if (frame_size < 8) bad("frame_size must be >= 8");
  if (noise_level < 0 || noise_level >= 1) bad("noise_level must be in [0, 1)");
  if (!(train_fraction > 0 && train_fraction <= 1)) bad("train_fraction must be in (0, 1]");
  const Taxonomy tax = taxonomy();  // checks the parent maps
  for (int s = 0; s < sets; ++s)
    if (tax.children(Level::kSet, s).empty()) bad("set " + std::to_string(s) + " has no elements");
  for (int e = 0; e < events; ++e)
    if (tax.children(Level::kEvent, e).empty()) bad("event " + std::to_string(e) + " has no sets");
  const auto sp = resolved_set_parents();
  for (int s = 0; s < sets; ++s)
    if (sibling_count(sp, s) > 2 * kNumShapes) bad("more sets under one event than shape/axis codes");
  const auto ep = resolved_element_parents();
  const int codes = max_motion_codes(noise_level);
  for (int l = 0; l < elements; ++l)
    if (sibling_count(ep, l) > codes)
      bad("more elements under set " + std::to_string(ep[l]) + " than distinguishable motion codes (" +
          std::to_string(codes) + ") at noise " + std::to_string(noise_level));
}

std::vector<double> element_frequencies(const SynthSpec& spec) {
  const auto ep = spec.resolved_element_parents();
  std::vector<double> f(static_cast<std::size_t>(spec.elements));
  for (int l = 0; l < spec.elements; ++l) {
    const int k = local_index(ep, l);
    const int n = sibling_count(ep, l);
    f[l] = n == 1 ? std::sqrt(kMinFrequency * kMaxFrequency)
                  : kMinFrequency * std::pow(kMaxFrequency / kMinFrequency, static_cast<double>(k) / (n - 1));
  }
  return f;
}

std::array<std::uint8_t, 3> event_background(int event_id, int event_count) {
  const auto rgb = hsv_to_rgb(static_cast<double>(event_id) / event_count, 0.65, 0.85);
  return {static_cast<std::uint8_t>(std::lround(rgb[0])), static_cast<std::uint8_t>(std::lround(rgb[1])),
          static_cast<std::uint8_t>(std::lround(rgb[2]))};
}

std::vector<Frame> render_clip(const SynthSpec& spec, const LabelTriple& labels, int clip_index) {
  Rng rng(derive_seed(spec.seed, {0x5157u, static_cast<std::uint64_t>(clip_index)}));
  const int size = spec.frame_size;
  const auto sp = spec.resolved_set_parents();
  const int local_set = local_index(sp, labels.set_id);
  const int shape = local_set % kNumShapes;
  // Sibling sets alternate the motion axis; the second block of shape codes flips the pairing.
  const bool vertical = (local_set + local_set / kNumShapes) % 2 == 1;
  const double freq = element_frequencies(spec)[static_cast<std::size_t>(labels.element_id)];

  const double phase = 2.0 * std::numbers::pi * uniform01(rng);
  const double amplitude = 0.25 * size;
  const double radius = 0.14 * size;
  const double cross_offset = (uniform01(rng) - 0.5) * 0.12 * size;
  const double noise_std = spec.noise_level * 80.0;
  const double bg_jitter = (uniform01(rng) - 0.5) * spec.noise_level * 0.3;

  const auto base = event_background(labels.event_id, spec.events);
  std::array<double, 3> bg{};
  for (int c = 0; c < 3; ++c) bg[c] = base[c] * (1.0 + bg_jitter);
  const std::array<double, 3> fg{25.0, 25.0, 25.0};

  constexpr int kSuper = 3;
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(spec.frames_per_clip));
  for (int t = 0; t < spec.frames_per_clip; ++t) {
    const double along = amplitude * std::sin(2.0 * std::numbers::pi * freq * t + phase);
    const double cx = 0.5 * size + (vertical ? cross_offset : along);
    const double cy = 0.5 * size + (vertical ? along : cross_offset);
    Frame f{size, size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size * 3)};
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        int hits = 0;
        for (int sy = 0; sy < kSuper; ++sy)
          for (int sx = 0; sx < kSuper; ++sx)
            hits += inside_shape(shape, x + (sx + 0.5) / kSuper - cx, y + (sy + 0.5) / kSuper - cy, radius);
        const double cover = static_cast<double>(hits) / (kSuper * kSuper);
        for (int c = 0; c < 3; ++c) {
          double v = cover * fg[c] + (1.0 - cover) * bg[c];
          if (noise_std > 0) v += noise_std * standard_normal(rng);
          f.rgb[(static_cast<std::size_t>(y) * size + x) * 3 + c] =
              static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

SynthDataset generate(const SynthSpec& spec, const fs::path& output_dir, int workers) {
  spec.validate();
  const Taxonomy tax = spec.taxonomy();
  std::error_code ec;
  fs::create_directories(output_dir / "clips", ec);
  require(!ec, ErrorCategory::kIo, "cannot create " + (output_dir / "clips").string() + ": " + ec.message());

  struct Job {
    int clip_index;
    LabelTriple labels;
    std::string rel_path;
  };
  std::vector<Job> jobs;
  for (int l = 0; l < spec.elements; ++l) {
    const LabelTriple labels = tax.lift(l);
    for (int k = 0; k < spec.clips_per_element; ++k) {
      const int idx = l * spec.clips_per_element + k;
      std::ostringstream name;
      name << "clips/clip_" << std::setw(5) << std::setfill('0') << idx;
      if (spec.storage == ClipStorage::kY4m) name << ".y4m";
      jobs.push_back({idx, labels, name.str()});
    }
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(1, workers)));
  auto work = [&](int w) {
    try {
      for (std::size_t j = next++; j < jobs.size(); j = next++) {
        const auto& job = jobs[j];
        auto frames = render_clip(spec, job.labels, job.clip_index);
        const fs::path target = output_dir / job.rel_path;
        if (spec.storage == ClipStorage::kY4m) {
          write_y4m(target, frames);
        } else {
          fs::create_directories(target);
          for (std::size_t t = 0; t < frames.size(); ++t) {
            std::ostringstream fname;
            fname << "frame_" << std::setw(5) << std::setfill('0') << t << ".ppm";
            write_ppm(target / fname.str(), frames[t]);
          }
        }
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  SynthDataset out;
  out.manifest.base_dir = fs::absolute(output_dir);
  Manifest train, test;
  train.base_dir = test.base_dir = out.manifest.base_dir;
  const int train_per_element = std::max(1, static_cast<int>(std::lround(spec.train_fraction * spec.clips_per_element)));
  for (const auto& job : jobs) {
    ManifestRecord r{job.rel_path, spec.frames_per_clip, job.labels};
    out.manifest.records.push_back(r);
    const int k = job.clip_index % spec.clips_per_element;
    (k < train_per_element ? train : test).records.push_back(r);
  }
  out.taxonomy_path = output_dir / "taxonomy.tsv";
  out.manifest_path = output_dir / "manifest.tsv";
  out.train_manifest_path = output_dir / "train.tsv";
  out.test_manifest_path = output_dir / "test.tsv";
  save_taxonomy(out.taxonomy_path, tax);
  out.manifest.save(out.manifest_path);
  train.save(out.train_manifest_path);
  test.save(out.test_manifest_path);
  return out;
}

}  // namespace hieract
