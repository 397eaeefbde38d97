// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when all pass.
//
//   hieract_acceptance --workdir DIR [--only N ...]
//
// Criteria 4, 7 and 9 share one full command-line pipeline run under DIR/pipeline.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "CLI11.hpp"
#include "gradcheck.hpp"
#include "hieract/checkpoint.hpp"
#include "hieract/config.hpp"
#include "hieract/digest.hpp"
#include "hieract/fusion_head.hpp"
#include "hieract/loss.hpp"
#include "hieract/sampling.hpp"
#include "hieract/synthetic.hpp"
#include "hieract/training.hpp"
#include "hieract_cli/commands.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hieract;

namespace {

using Clock = std::chrono::steady_clock;
using BigFloat = boost::multiprecision::cpp_bin_float_50;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

double level_top1(const json& report, const std::string& level) {
  for (const auto& l : report.at("levels"))
    if (l.at("level") == level) return l.at("top1").get<double>();
  throw std::runtime_error("report has no level " + level);
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hieract");
  std::cerr << "  $";
  for (const auto& a : args) std::cerr << ' ' << a;
  std::cerr << '\n';
  return cli::run(args, std::cout, std::cerr);
}

// ------------------------------------------------------------------ 1

Outcome loss_oracle() {
  Rng rng(101);
  const std::array<int, 3> counts{4, 15, 99};
  double worst_ce = 0.0;
  for (int n : counts) {
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> logits(static_cast<std::size_t>(n));
      const double scale = std::pow(10.0, 2.0 * uniform01(rng) - 0.5);  // 0.3 .. 30
      for (double& v : logits) v = scale * standard_normal(rng);
      const int t = static_cast<int>(uniform_below(rng, n));
      BigFloat sum = 0;
      for (double v : logits) sum += boost::multiprecision::exp(BigFloat(v));
      const BigFloat exact = boost::multiprecision::log(sum) - BigFloat(logits[t]);
      const double err = std::fabs(static_cast<double>(BigFloat(cross_entropy(logits, t)) - exact));
      worst_ce = std::max(worst_ce, err);
    }
  }
  double worst_total = 0.0;
  const LossWeights w{1.0, 2.0, 4.0};
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = 5 * uniform01(rng), b = 5 * uniform01(rng), c = 5 * uniform01(rng);
    const BigFloat dot = BigFloat(a) + 2 * BigFloat(b) + 4 * BigFloat(c);
    worst_total = std::max(worst_total, std::fabs(static_cast<double>(BigFloat(total_loss(a, b, c, w)) - dot)));
  }
  return {worst_ce <= 1e-9 && worst_total <= 1e-12,
          fmt("max |CE - 50-digit oracle| = %.3g (tol 1e-9) over 3x1000 pairs; max |total - dot| = %.3g (tol 1e-12)",
              worst_ce, worst_total)};
}

// ------------------------------------------------------------------ 2

Outcome gradient_checks() {
  const auto backbone = testing::pathway_gradcheck(2024, 60, 1e-5, 1e-3);
  const auto head = testing::head_gradcheck(2024, 80, 1e-5, 1e-4);
  const auto loss = testing::loss_gradcheck(2024, 200, 1e-4, 1e-4);
  const bool pass = backbone.checked >= 50 && head.checked >= 50 && loss.checked >= 50 &&
                    backbone.over_threshold == 0 && head.over_threshold == 0 && loss.over_threshold == 0;
  return {pass, fmt("backbone %d params max rel %.2g (tol 1e-3, %d kink draws skipped); head %d params max rel %.2g "
                    "(tol 1e-4, %d skipped); loss %d logits max rel %.2g (tol 1e-4)",
                    backbone.checked, backbone.max_rel_error, backbone.skipped_kinks, head.checked,
                    head.max_rel_error, head.skipped_kinks, loss.checked, loss.max_rel_error)};
}

// ------------------------------------------------------------------ 3

Outcome shape_contract() {
  const Taxonomy gym99 = load_taxonomy(fs::path(HIERACT_SOURCE_DIR) / "data/gym99_taxonomy.tsv");
  JointHeadConfig cfg = paper_run_config().head;
  cfg.class_counts = gym99.counts();
  cfg.input_dims = {2048, 2048, 2048};
  const JointHead head(cfg, 1);
  Rng rng(3);
  std::array<std::vector<double>, 3> features;
  for (auto& f : features) {
    f.resize(2048);
    for (double& v : f) v = uniform01(rng);
  }
  const auto e = head.encode(Level::kEvent, features[0]);
  const auto s = head.encode(Level::kSet, features[1]);
  const auto x = head.encode(Level::kElement, features[2]);
  JointHeadCache cache;
  const JointLogits out = head.forward({features[0], features[1], features[2]}, &cache);
  const auto fused = head.fuse(e, s, x);
  const bool pass = e.size() == 128 && s.size() == 256 && x.size() == 1024 && cfg.concat_dim() == 1408 &&
                    cache.concat.size() == 1408 && fused.size() == 1024 && cache.joint.size() == 1024 &&
                    out.event_logits.size() == 4 && out.set_logits.size() == 15 && out.element_logits.size() == 99;
  return {pass, fmt("encoders %zu/%zu/%zu, concat %zu, fusion %zu, logits (%zu, %zu, %zu)", e.size(), s.size(),
                    x.size(), cache.concat.size(), fused.size(), out.event_logits.size(), out.set_logits.size(),
                    out.element_logits.size())};
}

// ------------------------------------------------------------------ 5

Outcome sampling_invariants() {
  std::vector<int> spans;
  for (const SamplingSpec& s : {default_sampling_spec(Level::kEvent), default_sampling_spec(Level::kSet),
                                default_sampling_spec(Level::kSet, true), default_sampling_spec(Level::kElement)})
    spans.push_back(s.span());
  // The four specs in ascending span order: 4x16, 8x8, 16x4, 32x2.
  std::sort(spans.begin(), spans.end());
  bool ok = spans == std::vector<int>{49, 57, 61, 63};

  Rng rng(55);
  int bad = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    SamplingSpec s{1 + static_cast<int>(uniform_below(rng, 48)), 1 + static_cast<int>(uniform_below(rng, 20)), 8,
                   Level::kEvent};
    const int n = 1 + static_cast<int>(uniform_below(rng, 400));
    const auto mode = static_cast<SamplingMode>(uniform_below(rng, 3));
    const int clips = 1 + static_cast<int>(uniform_below(rng, 8));
    const ClipSelection sel = mode == SamplingMode::kTrainRandom  ? ClipSelection::train_random()
                              : mode == SamplingMode::kTestCenter ? ClipSelection::test_center()
                                                                  : ClipSelection::test_multi(clips);
    const auto plan = plan_indices(n, s, sel, rng());
    for (const auto& clip : plan.clips) {
      if (static_cast<int>(clip.size()) != s.num_frames) ++bad;
      for (int i : clip) bad += (i < 0 || i >= n);
    }
  }
  int nondeterministic = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const SamplingSpec s{1 + static_cast<int>(uniform_below(rng, 32)), 1 + static_cast<int>(uniform_below(rng, 16)),
                         8, Level::kSet};
    const int n = 1 + static_cast<int>(uniform_below(rng, 300));
    for (const ClipSelection sel : {ClipSelection::test_center(), ClipSelection::test_multi(6)}) {
      const auto a = plan_indices(n, s, sel, rng()), b = plan_indices(n, s, sel, rng());
      nondeterministic += a.clips != b.clips;
    }
  }
  ok = ok && bad == 0 && nondeterministic == 0;
  return {ok, fmt("spans %d/%d/%d/%d; %d out-of-range or misshapen clips over 10000 cases; %d test-mode plans "
                  "changed with the seed",
                  spans[0], spans[1], spans[2], spans[3], bad, nondeterministic)};
}

// ------------------------------------------------------------------ 6

Outcome metric_oracles() {
  Rng rng(66);
  int mismatches = 0;
  for (Level level : kAllLevels) {
    const int n = 2 + static_cast<int>(uniform_below(rng, 30));
    std::vector<PredictionRecord> rs;
    for (int i = 0; i < 1000; ++i) {
      PredictionRecord r;
      r.truth = {0, 0, 0};
      const int t = static_cast<int>(uniform_below(rng, n));
      if (level == Level::kEvent) r.truth.event_id = t;
      if (level == Level::kSet) r.truth.set_id = t;
      if (level == Level::kElement) r.truth.element_id = t;
      std::vector<double> s(static_cast<std::size_t>(n));
      const bool ties = i % 3 == 0;
      double sum = 0;
      for (double& v : s) sum += (v = ties ? static_cast<double>(uniform_below(rng, 3)) + 1 : uniform01(rng) + 1e-3);
      for (double& v : s) v /= sum;
      r.scores[level_index(level)] = s;
      rs.push_back(std::move(r));
    }
    // counting oracles: rank = #{strictly better} + #{tied with a lower index}
    auto rank = [&](const PredictionRecord& r) {
      const auto& s = r.at(level);
      const int t = r.truth.at(level);
      int ahead = 0;
      for (int j = 0; j < n; ++j) ahead += s[j] > s[t] || (s[j] == s[t] && j < t);
      return ahead;
    };
    for (int k = 1; k <= std::min(n, 5); ++k) {
      int hits = 0;
      for (const auto& r : rs) hits += rank(r) < k;
      mismatches += top_k_accuracy(rs, level, k) != static_cast<double>(hits) / rs.size();
    }
    std::vector<int> hit(n), support(n);
    for (const auto& r : rs) {
      ++support[r.truth.at(level)];
      hit[r.truth.at(level)] += rank(r) == 0;
    }
    double sum = 0;
    int present = 0;
    for (int c = 0; c < n; ++c)
      if (support[c]) sum += static_cast<double>(hit[c]) / support[c], ++present;
    mismatches += mean_class_accuracy(rs, level) != sum / present;
  }

  std::vector<PredictionRecord> imbalanced;
  for (int i = 0; i < 100; ++i) {
    PredictionRecord r;
    r.truth = {0, 0, i < 90 ? 0 : 1};
    r.scores[2] = {0.7, 0.3};
    imbalanced.push_back(r);
  }
  const double top1 = top_k_accuracy(imbalanced, Level::kElement, 1);
  const double mean = mean_class_accuracy(imbalanced, Level::kElement);
  return {mismatches == 0 && top1 == 0.9 && mean == 0.5,
          fmt("%d oracle mismatches over 3x1000 records (top-1..5 and mean-class); imbalanced case top-1 %.2f, "
              "mean %.2f",
              mismatches, top1, mean)};
}

// ------------------------------------------------------------------ 8

Outcome multirate_premise() {
  // Every frame of a clip shares one phase and offset, so the clip, not the
  // frame, is the independent unit. Many clips are rendered in memory to get
  // the standard error of the element estimate well below the 10% band.
  SynthSpec spec;
  spec.noise_level = 0.0;
  spec.seed = 808;
  spec.clips_per_element = 400;
  spec.validate();
  const Taxonomy tax = spec.taxonomy();
  const int train_clips = spec.clips_per_element / 2;
  const std::size_t dim = static_cast<std::size_t>(spec.frame_size) * spec.frame_size * 3;
  const int events = tax.count(Level::kEvent), elements = tax.count(Level::kElement);

  // Nearest-centroid single-frame classifiers on raw pixels, fitted on the first half of each element's clips.
  std::vector<std::vector<double>> event_c(events, std::vector<double>(dim)), element_c(elements, std::vector<double>(dim));
  std::vector<double> event_n(events), element_n(elements);
  for (int x = 0; x < elements; ++x) {
    const LabelTriple y = tax.lift(x);
    for (int k = 0; k < train_clips; ++k) {
      for (const Frame& f : render_clip(spec, y, x * spec.clips_per_element + k)) {
        for (std::size_t d = 0; d < dim; ++d) {
          event_c[y.event_id][d] += f.rgb[d];
          element_c[x][d] += f.rgb[d];
        }
        event_n[y.event_id] += 1;
        element_n[x] += 1;
      }
    }
  }
  for (int e = 0; e < events; ++e)
    for (double& v : event_c[e]) v /= event_n[e];
  for (int x = 0; x < elements; ++x)
    for (double& v : element_c[x]) v /= element_n[x];

  auto nearest = [&](const std::vector<std::vector<double>>& c, const Frame& f, const std::vector<int>& allowed) {
    int best = -1;
    double best_d = 1e300;
    for (int y : allowed) {
      double d = 0;
      for (std::size_t k = 0; k < dim; ++k) d += (f.rgb[k] - c[y][k]) * (f.rgb[k] - c[y][k]);
      if (d < best_d) best_d = d, best = y;
    }
    return best;
  };
  std::vector<int> all_events(events), all_elements(elements);
  for (int e = 0; e < events; ++e) all_events[e] = e;
  for (int x = 0; x < elements; ++x) all_elements[x] = x;

  double event_hits = 0, sibling_hits = 0, open_hits = 0, frames = 0, chance_sum = 0;
  std::vector<double> per_clip;
  for (int x = 0; x < elements; ++x) {
    const LabelTriple y = tax.lift(x);
    const auto siblings = tax.children(Level::kSet, y.set_id);
    for (int k = train_clips; k < spec.clips_per_element; ++k) {
      double clip_hits = 0, clip_frames = 0;
      for (const Frame& f : render_clip(spec, y, x * spec.clips_per_element + k)) {
        event_hits += nearest(event_c, f, all_events) == y.event_id;
        const bool hit = nearest(element_c, f, siblings) == x;
        sibling_hits += hit;
        clip_hits += hit;
        open_hits += nearest(element_c, f, all_elements) == x;
        chance_sum += 1.0 / siblings.size();
        frames += 1;
        clip_frames += 1;
      }
      per_clip.push_back(clip_hits / clip_frames);
    }
  }
  double mean = 0, var = 0;
  for (double v : per_clip) mean += v / per_clip.size();
  for (double v : per_clip) var += (v - mean) * (v - mean) / (per_clip.size() - 1);
  const double stderr_clip = std::sqrt(var / per_clip.size());

  const double event_acc = event_hits / frames;
  const double element_acc = sibling_hits / frames;
  const double chance = chance_sum / frames;
  const bool pass = event_acc >= 0.99 && std::fabs(element_acc - chance) <= 0.1 * chance;
  return {pass, fmt("%zu test clips, %.0f frames: event accuracy %.4f (need >= 0.99); element accuracy among set "
                    "siblings %.4f +- %.4f (clip-level s.e.) vs chance %.3f (need within +-10%%); 8-way element "
                    "accuracy %.4f, which the visible set lifts to about 1/2",
                    per_clip.size(), frames, event_acc, element_acc, stderr_clip, chance, open_hits / frames)};
}

// ------------------------------------------------------------------ 4, 7, 9

struct Pipeline {
  bool ran = false;
  bool ok = false;
  std::string failure;
  double joint_seconds = 0, total_seconds = 0, second_joint_seconds = 0;
  std::array<std::string, 3> file_sha_before, file_sha_after;
  std::array<std::string, 3> digests_before, digests_after, loaded_digests;
  json base_element_report, joint_report;
  std::string metrics_a, metrics_b;
  std::string head_digest_a, head_digest_b;
};

Pipeline run_pipeline(const fs::path& work) {
  Pipeline p;
  p.ran = true;
  const fs::path dir = work / "pipeline";
  fs::remove_all(dir);
  const std::string data = (dir / "data").string(), out = (dir / "out").string(), out_b = (dir / "out_repeat").string();
  const auto t0 = Clock::now();
  auto step = [&](const std::vector<std::string>& args) {
    if (!p.failure.empty()) return;
    if (cli(args) != 0) p.failure = "command failed: " + args[0];
  };
  step({"gen-synth", "--output", data});
  for (const char* level : {"event", "set", "element"}) step({"train-base", "--level", level, "--data", data, "--output", out});
  if (!p.failure.empty()) return p;

  const std::array<std::string, 3> names{"event", "set", "element"};
  for (int l = 0; l < 3; ++l) p.file_sha_before[l] = sha256_hex(slurp(fs::path(out) / ("base_" + names[l] + ".ckpt")));
  const std::vector<std::string> joint_args{"train-joint", "--data", data};
  auto with_output = [](std::vector<std::string> a, const std::string& o) {
    a.insert(a.end(), {"--output", o});
    return a;
  };
  const auto tj = Clock::now();
  step(with_output(joint_args, out));
  p.joint_seconds = seconds_since(tj);
  for (int l = 0; l < 3; ++l) p.file_sha_after[l] = sha256_hex(slurp(fs::path(out) / ("base_" + names[l] + ".ckpt")));
  step({"evaluate", "--checkpoint", out + "/base_element.ckpt", "--data", data, "--output", out});
  step({"evaluate", "--checkpoint", out + "/joint.ckpt", "--data", data, "--output", out});
  p.total_seconds = seconds_since(t0);
  if (!p.failure.empty()) return p;

  // Second stage-2 run with identical config and seed, reading the same bases.
  const auto tb = Clock::now();
  step(with_output({"train-joint", "--data", data, "--event-base", out + "/base_event.ckpt", "--set-base",
                    out + "/base_set.ckpt", "--element-base", out + "/base_element.ckpt"},
                   out_b));
  p.second_joint_seconds = seconds_since(tb);
  if (!p.failure.empty()) return p;

  const json manifest = read_json(fs::path(out) / "run_manifest.train_joint.json");
  const json manifest_b = read_json(fs::path(out_b) / "run_manifest.train_joint.json");
  for (int l = 0; l < 3; ++l) {
    p.digests_before[l] = manifest["details"]["frozen_digests_before"][l];
    p.digests_after[l] = manifest["details"]["frozen_digests_after"][l];
    p.loaded_digests[l] = load_base(fs::path(out) / ("base_" + names[l] + ".ckpt")).digest();
  }
  p.head_digest_a = manifest["details"]["head_digest"];
  p.head_digest_b = manifest_b["details"]["head_digest"];
  p.metrics_a = slurp(fs::path(out) / "metrics_joint.jsonl");
  p.metrics_b = slurp(fs::path(out_b) / "metrics_joint.jsonl");
  p.base_element_report = read_json(fs::path(out) / "eval_base_element/report.json");
  p.joint_report = read_json(fs::path(out) / "eval_joint/report.json");
  p.ok = true;
  return p;
}

Outcome freeze_invariant(const Pipeline& p) {
  if (!p.ok) return {false, "pipeline did not complete: " + p.failure};
  bool same = true;
  for (int l = 0; l < 3; ++l)
    same = same && p.file_sha_before[l] == p.file_sha_after[l] && p.digests_before[l] == p.digests_after[l] &&
           p.digests_before[l] == p.loaded_digests[l];
  const int epochs = desk_run_config().joint_optim.epochs;
  return {same && p.joint_seconds < 15 * 60,
          fmt("%d-epoch stage-2 run in %.0f s (budget 900 s); 3 base parameter digests and checkpoint files %s "
              "(event %.12s..)",
              epochs, p.joint_seconds, same ? "bitwise unchanged" : "CHANGED", p.digests_after[0].c_str())};
}

Outcome mechanism_check(const Pipeline& p) {
  if (!p.ok) return {false, "pipeline did not complete: " + p.failure};
  const double base = level_top1(p.base_element_report, "element");
  const double joint_el = level_top1(p.joint_report, "element");
  const double joint_set = level_top1(p.joint_report, "set");
  const double joint_ev = level_top1(p.joint_report, "event");
  const bool pass = joint_el >= base - 0.02 && joint_set >= 0.90 && joint_ev >= 0.90 && p.total_seconds < 3600;
  return {pass, fmt("element: joint %.4f vs element-only base %.4f (need >= base - 0.02); joint set %.4f, event %.4f "
                    "(need >= 0.90); pipeline %.0f s (budget 3600 s)",
                    joint_el, base, joint_set, joint_ev, p.total_seconds)};
}

Outcome reproducibility(const Pipeline& p) {
  if (!p.ok) return {false, "pipeline did not complete: " + p.failure};
  std::istringstream a(p.metrics_a), b(p.metrics_b);
  std::string la, lb;
  std::size_t lines = 0;
  double worst = 0.0;
  bool structure = true;
  std::function<void(const json&, const json&)> compare = [&](const json& x, const json& y) {
    if (x.is_number() && y.is_number()) {
      worst = std::max(worst, std::fabs(x.get<double>() - y.get<double>()));
    } else if (x.is_object() && y.is_object() && x.size() == y.size()) {
      for (const auto& [k, v] : x.items()) {
        if (!y.contains(k)) structure = false;
        else compare(v, y.at(k));
      }
    } else if (x != y) {
      structure = false;
    }
  };
  while (true) {
    const bool ga = static_cast<bool>(std::getline(a, la)), gb = static_cast<bool>(std::getline(b, lb));
    if (ga != gb) structure = false;
    if (!ga || !gb) break;
    compare(json::parse(la), json::parse(lb));
    ++lines;
  }
  const bool pass = structure && lines > 0 && worst <= 1e-6 && p.head_digest_a == p.head_digest_b;
  return {pass, fmt("%zu metric records, max field difference %.3g (tol 1e-6), streams %s; head digests %s "
                    "(%.12s.. / %.12s..); second run %.0f s",
                    lines, worst, structure ? "aligned" : "MISALIGNED",
                    p.head_digest_a == p.head_digest_b ? "identical" : "DIFFER", p.head_digest_a.c_str(),
                    p.head_digest_b.c_str(), p.second_joint_seconds)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hieract acceptance suite"};
  std::string workdir = (fs::temp_directory_path() / "hieract_acceptance").string();
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Scratch directory for generated data and checkpoints");
  app.add_option("--only", only, "Run only these criteria (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int n) { return selected.empty() || selected.count(n); };

  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  Pipeline pipeline;
  auto need_pipeline = [&]() -> const Pipeline& {
    if (!pipeline.ran) pipeline = run_pipeline(workdir);
    return pipeline;
  };
  const std::vector<Criterion> criteria{
      {1, "loss oracle equivalence", 10, loss_oracle},
      {2, "gradient checks", 120, gradient_checks},
      {3, "shape contract", 0, shape_contract},
      {4, "freeze invariant", 0, [&] { return freeze_invariant(need_pipeline()); }},
      {5, "sampling invariants", 10, sampling_invariants},
      {6, "metric oracles", 10, metric_oracles},
      {7, "mechanism check", 0, [&] { return mechanism_check(need_pipeline()); }},
      {8, "multi-rate premise", 300, multirate_premise},
      {9, "reproducibility", 0, [&] { return reproducibility(need_pipeline()); }},
  };

  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!wanted(c.id)) continue;
    ++ran;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    if (c.budget_seconds > 0 && secs >= c.budget_seconds) {
      o.pass = false;
      o.detail += fmt(" [over the %.0f s budget]", c.budget_seconds);
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << ", " << fmt("%.1f", secs)
              << " s): " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "ALL PASS" : "FAILURES") << ": " << ran - failed << "/" << ran << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
