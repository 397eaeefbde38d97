#include "hieract_cli/commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hieract/checkpoint.hpp"
#include "hieract/dataset.hpp"
#include "hieract/error.hpp"
#include "hieract/evaluation.hpp"
#include "hieract/synthetic.hpp"
#include "hieract/training.hpp"
#include "hieract/video_io.hpp"
#include "json.hpp"

#ifndef HIERACT_VERSION
#define HIERACT_VERSION "unknown"
#endif

namespace hieract::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string absolute_string(const fs::path& p) { return p.empty() ? std::string() : fs::absolute(p).lexically_normal().string(); }

fs::path require_output(const CommonArgs& args) {
  require(!args.output_dir.empty(), ErrorCategory::kConfig, "--output DIR is required");
  fs::create_directories(args.output_dir);
  return args.output_dir;
}

void require_input(const std::string& path, const std::string& what) {
  require(!path.empty(), ErrorCategory::kConfig, what + " path is not set");
  require(fs::exists(path), ErrorCategory::kConfig, what + " path does not exist: " + path);
}

void write_run_manifest(const fs::path& dir, const std::string& tag, const std::string& command,
                        const CommonArgs& args, const RunConfig& config, json extra = json::object()) {
  json m;
  m["command"] = command;
  m["argv"] = args.argv;
  m["config"] = json::parse(run_config_to_json(config));
  m["seed"] = config.seed;
  m["workers"] = worker_count_from_env();
  m["versions"] = {{"hieract", HIERACT_VERSION},
                   {"compiler", __VERSION__},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  m["details"] = std::move(extra);
  write_file_atomic(dir / ("run_manifest." + tag + ".json"), m.dump(2) + "\n");
}

template <typename Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const Error& e) {
    log << "error [" << category_name(e.category()) << "]: " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const fs::filesystem_error& e) {
    log << "error [io]: " << e.what() << "\n";
    return exit_code_for(ErrorCategory::kIo);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

/// Writes each metrics record to a JSONL file and prints one summary line per epoch.
class MetricsLogger {
 public:
  MetricsLogger(const fs::path& path, std::ostream& log, bool quiet) : out_(path), log_(log), quiet_(quiet) {
    require(static_cast<bool>(out_), ErrorCategory::kIo, "cannot write metrics file " + path.string());
  }
  ~MetricsLogger() { flush_epoch(); }
  void finish() { flush_epoch(); }

  void operator()(const MetricsRecord& r) {
    if (r.epoch != epoch_) flush_epoch();
    out_ << metrics_to_json_line(r) << "\n";
    epoch_ = r.epoch;
    lr_ = r.lr;
    sum_total_ += r.total_loss;
    for (std::size_t i = 0; i < 3; ++i)
      if (r.accuracy[i]) acc_[i] += *r.accuracy[i], has_[i] = true;
    ++count_;
  }

 private:
  void flush_epoch() {
    if (count_ == 0) return;
    if (!quiet_) {
      std::ostringstream line;
      line.setf(std::ios::fixed);
      line.precision(4);
      line << "epoch " << epoch_ << "  lr " << lr_ << "  loss " << sum_total_ / count_;
      for (Level l : kAllLevels)
        if (has_[level_index(l)]) line << "  " << level_name(l) << "_acc " << acc_[level_index(l)] / count_;
      log_ << line.str() << "\n" << std::flush;
    }
    out_.flush();
    count_ = 0;
    sum_total_ = 0.0;
    acc_ = {};
  }

  std::ofstream out_;
  std::ostream& log_;
  bool quiet_;
  int epoch_ = -1;
  double lr_ = 0.0;
  double sum_total_ = 0.0;
  std::array<double, 3> acc_{};
  std::array<bool, 3> has_{};
  int count_ = 0;
};

ClipStore open_split(const std::string& manifest_path, const Taxonomy* taxonomy) {
  Manifest m = Manifest::load(manifest_path);
  if (taxonomy) validate_manifest(m, *taxonomy);
  ClipStore store(std::move(m));
  store.preload(worker_count_from_env());
  return store;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string default_base_path(const RunConfig& c, const fs::path& out, Level l) {
  const std::string& configured = c.paths.base_checkpoints[level_index(l)];
  if (!configured.empty()) return configured;
  return (out / ("base_" + std::string(level_name(l)) + ".ckpt")).string();
}

void emit_report(const fs::path& dir, const std::vector<PredictionRecord>& records, const Taxonomy& taxonomy,
                 std::ostream& log, bool quiet) {
  fs::create_directories(dir);
  const EvaluationReport report = evaluate_records(records, taxonomy);
  write_file_atomic(dir / "report.json", report_to_json(report) + "\n");
  const std::string table = report_to_table(report);
  write_file_atomic(dir / "report.txt", table);
  write_per_class_data(dir, report);
  std::string lines;
  for (const auto& r : records) lines += prediction_to_json_line(r, &taxonomy) + "\n";
  write_file_atomic(dir / "predictions.jsonl", lines);
  if (!quiet) log << table;
}

}  // namespace

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig c = args.config_path.empty() ? desk_run_config() : load_run_config(args.config_path);
  if (args.seed) {
    c.seed = *args.seed;
    c.synth.seed = *args.seed;
  }
  if (args.epochs) {
    c.base_optim.epochs = *args.epochs;
    c.joint_optim.epochs = *args.epochs;
    auto trim = [](OptimizerConfig& o) {
      std::erase_if(o.lr_decay_epochs, [&](int e) { return e >= o.epochs; });
    };
    trim(c.base_optim);
    trim(c.joint_optim);
  }
  if (args.lr) {
    c.base_optim.learning_rate = *args.lr;
    c.joint_optim.learning_rate = *args.lr;
  }
  if (args.clips) {
    c.eval.base_clips = *args.clips;
    c.eval.joint_clips = *args.clips;
  }
  if (!args.data_dir.empty()) {
    const fs::path d = args.data_dir;
    c.paths.taxonomy = absolute_string(d / "taxonomy.tsv");
    c.paths.train_manifest = absolute_string(d / "train.tsv");
    c.paths.eval_manifest = absolute_string(d / "test.tsv");
  }
  if (!args.output_dir.empty() && c.paths.output_dir.empty()) c.paths.output_dir = absolute_string(args.output_dir);
  c.validate();
  return c;
}

int cmd_gen_synth(const CommonArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig c = resolve_config(args);
    const fs::path out = require_output(args);
    const auto t0 = std::chrono::steady_clock::now();
    const SynthDataset ds = generate(c.synth, out, worker_count_from_env());
    if (!args.quiet)
      log << "generated " << ds.manifest.size() << " clips in " << seconds_since(t0) << " s -> " << out.string() << "\n";
    write_run_manifest(out, "gen_synth", "gen-synth", args, c,
                       {{"taxonomy", absolute_string(ds.taxonomy_path)},
                        {"train_manifest", absolute_string(ds.train_manifest_path)},
                        {"test_manifest", absolute_string(ds.test_manifest_path)},
                        {"clips", ds.manifest.size()}});
  });
}

int cmd_train_base(const TrainBaseArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig c = resolve_config(args.common);
    const fs::path out = require_output(args.common);
    require_input(c.paths.taxonomy, "taxonomy");
    require_input(c.paths.train_manifest, "train manifest");
    const Taxonomy taxonomy = load_taxonomy(c.paths.taxonomy);
    const ClipStore train = open_split(c.paths.train_manifest, &taxonomy);
    std::optional<ClipStore> val;
    if (!c.paths.eval_manifest.empty() && fs::exists(c.paths.eval_manifest)) val.emplace(open_split(c.paths.eval_manifest, &taxonomy));

    const std::string name(level_name(args.level));
    MetricsLogger logger(out / ("metrics_base_" + name + ".jsonl"), log, args.common.quiet);
    BaseTrainOptions o;
    o.level = args.level;
    o.pathway = c.pathway_config(args.level);
    o.sampling = c.sampling[level_index(args.level)];
    o.preprocess = c.preprocess;
    o.optim = c.base_optim;
    o.seed = derive_seed(c.seed, {level_index(args.level)});
    o.sink = std::ref(logger);
    o.dump_dir = out;
    o.validation = val ? &*val : nullptr;
    o.eval_clips = c.eval.base_clips;
    const auto t0 = std::chrono::steady_clock::now();
    const BaseTrainResult r = train_base(train, taxonomy, o);
    logger.finish();
    const fs::path ckpt = out / ("base_" + name + ".ckpt");
    save_base(ckpt, r.model);
    if (!args.common.quiet) {
      log << name << " base: train top-1 " << r.train_top1;
      if (r.val_top1) log << ", val top-1 (" << o.eval_clips << " clips) " << *r.val_top1;
      log << ", " << seconds_since(t0) << " s -> " << ckpt.string() << "\n";
    }
    write_run_manifest(out, "train_base_" + name, "train-base", args.common, c,
                       {{"level", name},
                        {"checkpoint", absolute_string(ckpt)},
                        {"digest", r.model.digest()},
                        {"metrics", json::parse(r.model.metrics_json)}});
  });
}

int cmd_train_joint(const TrainJointArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig c = resolve_config(args.common);
    const fs::path out = require_output(args.common);
    require_input(c.paths.taxonomy, "taxonomy");
    require_input(c.paths.train_manifest, "train manifest");
    const Taxonomy taxonomy = load_taxonomy(c.paths.taxonomy);

    std::array<std::optional<BaseModel>, 3> bases;
    std::array<std::string, 3> base_paths;
    for (Level l : kAllLevels) {
      const std::size_t li = level_index(l);
      base_paths[li] = absolute_string(args.bases[li].empty() ? default_base_path(c, out, l) : args.bases[li]);
      bases[li].emplace(load_base(base_paths[li]));
      require(bases[li]->level == l, ErrorCategory::kCheckpoint,
              base_paths[li] + " is a " + std::string(level_name(bases[li]->level)) + " base, expected " +
                  std::string(level_name(l)));
    }
    const ClipStore train = open_split(c.paths.train_manifest, &taxonomy);

    MetricsLogger logger(out / "metrics_joint.jsonl", log, args.common.quiet);
    JointTrainOptions o;
    o.head = c.head;
    o.optim = c.joint_optim;
    o.loss_weights = c.loss_weights;
    o.seed = derive_seed(c.seed, {3});
    o.train_mode = c.joint.train_mode;
    o.cache_features = c.joint.cache_features;
    o.sink = std::ref(logger);
    o.dump_dir = out;
    const auto t0 = std::chrono::steady_clock::now();
    JointTrainResult r = train_joint({&*bases[0], &*bases[1], &*bases[2]}, train, taxonomy, o);
    logger.finish();

    JointModel model(r.head_config, o.seed);
    model.head = std::move(*r.head);
    model.loss_weights = c.loss_weights;
    for (std::size_t li = 0; li < 3; ++li) {
      // Bases under the output dir are stored relative so the directory can move as a whole.
      const fs::path rel = fs::path(base_paths[li]).lexically_relative(fs::absolute(out));
      const bool inside = !rel.empty() && *rel.begin() != "..";
      model.base_paths[li] = inside ? rel.string() : base_paths[li];
      model.base_digests[li] = r.digests_after[li];
    }
    model.metrics_json = json{{"train_top1", r.train_top1}, {"steps", r.state.step}, {"epochs", o.optim.epochs}}.dump();
    const fs::path ckpt = out / "joint.ckpt";
    save_joint(ckpt, model);
    if (!args.common.quiet)
      log << "joint head: train top-1 event " << r.train_top1[0] << " set " << r.train_top1[1] << " element "
          << r.train_top1[2] << ", " << seconds_since(t0) << " s -> " << ckpt.string() << "\n";
    write_run_manifest(out, "train_joint", "train-joint", args.common, c,
                       {{"checkpoint", absolute_string(ckpt)},
                        {"base_checkpoints", base_paths},
                        {"frozen_digests_before", r.digests_before},
                        {"frozen_digests_after", r.digests_after},
                        {"head_digest", model.head.params().digest()}});
  });
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig c = resolve_config(args.common);
    const fs::path out = require_output(args.common);
    require_input(c.paths.taxonomy, "taxonomy");
    const std::string manifest = args.manifest.empty() ? c.paths.eval_manifest : args.manifest;
    require_input(manifest, "evaluation manifest");
    std::string ckpt_path = args.checkpoint.empty() ? c.paths.joint_checkpoint : args.checkpoint;
    if (ckpt_path.empty()) ckpt_path = (out / "joint.ckpt").string();
    const Taxonomy taxonomy = load_taxonomy(c.paths.taxonomy);
    const ClipStore split = open_split(manifest, &taxonomy);

    const Checkpoint ckpt = read_checkpoint(ckpt_path);
    std::vector<PredictionRecord> records;
    int clips = 0;
    if (ckpt.kind == "base") {
      clips = c.eval.base_clips;
      records = predict_base(base_from_checkpoint(ckpt), split, clips, c.eval.aggregation);
    } else {
      clips = c.eval.joint_clips;
      records = predict_joint(load_joint(ckpt_path), split, clips, c.eval.aggregation);
    }
    const fs::path dir = out / ("eval_" + fs::path(ckpt_path).stem().string());
    emit_report(dir, records, taxonomy, log, args.common.quiet);
    write_run_manifest(out, "evaluate_" + fs::path(ckpt_path).stem().string(), "evaluate", args.common, c,
                       {{"checkpoint", absolute_string(ckpt_path)},
                        {"checkpoint_kind", ckpt.kind},
                        {"manifest", absolute_string(manifest)},
                        {"clips", clips},
                        {"report", absolute_string(dir / "report.json")}});
  });
}

int cmd_predict(const PredictArgs& args, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig c = resolve_config(args.common);
    require(!args.clip.empty() != !args.manifest.empty(), ErrorCategory::kConfig,
            "predict needs exactly one of --clip or --manifest");
    std::string ckpt_path = args.checkpoint.empty() ? c.paths.joint_checkpoint : args.checkpoint;
    require_input(ckpt_path, "checkpoint");
    std::optional<Taxonomy> taxonomy;
    if (!c.paths.taxonomy.empty() && fs::exists(c.paths.taxonomy)) taxonomy.emplace(load_taxonomy(c.paths.taxonomy));

    Manifest m;
    if (!args.clip.empty()) {
      require_input(args.clip, "clip");
      m.records.push_back({absolute_string(args.clip), count_clip_frames(args.clip), {-1, -1, -1}});
    } else {
      require_input(args.manifest, "manifest");
      m = Manifest::load(args.manifest);
    }
    ClipStore store(std::move(m));
    store.preload(worker_count_from_env());

    const Checkpoint ckpt = read_checkpoint(ckpt_path);
    std::vector<PredictionRecord> records;
    if (ckpt.kind == "base") {
      records = predict_base(base_from_checkpoint(ckpt), store, c.eval.base_clips, c.eval.aggregation);
    } else {
      records = predict_joint(load_joint(ckpt_path), store, c.eval.joint_clips, c.eval.aggregation);
    }
    std::string lines;
    for (const auto& r : records) lines += prediction_to_json_line(r, taxonomy ? &*taxonomy : nullptr) + "\n";
    out << lines << std::flush;
    if (!args.common.output_dir.empty()) {
      const fs::path dir = require_output(args.common);
      write_file_atomic(dir / "predictions.jsonl", lines);
      write_run_manifest(dir, "predict", "predict", args.common, c,
                         {{"checkpoint", absolute_string(ckpt_path)},
                          {"clip", args.clip.empty() ? "" : absolute_string(args.clip)},
                          {"manifest", args.manifest.empty() ? "" : absolute_string(args.manifest)},
                          {"records", records.size()}});
    }
  });
}

int cmd_replay(const fs::path& run_manifest, const std::string& output_dir, std::ostream& log) {
  std::vector<std::string> argv;
  const int rc = guarded(log, [&] {
    std::ifstream in(run_manifest);
    require(static_cast<bool>(in), ErrorCategory::kConfig, "cannot open run manifest " + run_manifest.string());
    json m;
    try {
      in >> m;
      argv = m.at("argv").get<std::vector<std::string>>();
      const fs::path out = output_dir.empty() ? run_manifest.parent_path() : fs::path(output_dir);
      fs::create_directories(out);
      const fs::path cfg = out / "replay_config.json";
      write_file_atomic(cfg, m.at("config").dump(2) + "\n");
      // Overrides are already folded into the snapshot, so only config and output are rewritten.
      std::vector<std::string> next;
      for (std::size_t i = 0; i < argv.size(); ++i) {
        if ((argv[i] == "--config" || argv[i] == "--output") && i + 1 < argv.size()) {
          ++i;
          continue;
        }
        next.push_back(argv[i]);
      }
      next.insert(next.begin() + std::min<std::size_t>(2, next.size()), {"--config", cfg.string(), "--output", out.string()});
      argv = std::move(next);
    } catch (const json::exception& e) {
      fail(ErrorCategory::kConfig, std::string("malformed run manifest: ") + e.what());
    }
  });
  if (rc != 0) return rc;
  return run(argv, std::cout, log);
}

int run(const std::vector<std::string>& argv_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"hieract: multi-rate, multi-task hierarchical action recognition"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(HIERACT_VERSION));

  CommonArgs common;
  common.argv = argv_in;
  std::uint64_t seed = 0;
  int epochs = 0, clips = 0;
  double lr = 0.0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON run config (default: built-in desk config)")->check(CLI::ExistingFile);
    sub->add_option("--output", common.output_dir, "Output directory");
    sub->add_option("--data", common.data_dir, "Dataset directory holding taxonomy.tsv, train.tsv, test.tsv");
    sub->add_option("--seed", seed, "Override the run seed");
    sub->add_option("--epochs", epochs, "Override training epochs")->check(CLI::PositiveNumber);
    sub->add_option("--lr", lr, "Override the learning rate")->check(CLI::PositiveNumber);
    sub->add_option("--clips", clips, "Override the number of test clips")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", common.quiet, "Suppress console progress");
  };

  auto* gen = app.add_subcommand("gen-synth", "Render the synthetic hierarchical dataset");
  add_common(gen);

  std::string level_text = "event";
  auto* base = app.add_subcommand("train-base", "Stage 1: train one single-level pathway");
  add_common(base);
  base->add_option("--level", level_text, "event, set or element")->required()->check(CLI::IsMember({"event", "set", "element"}));

  std::array<std::string, 3> bases;
  auto* joint = app.add_subcommand("train-joint", "Stage 2: train the joint head over frozen bases");
  add_common(joint);
  joint->add_option("--event-base", bases[0], "Event base checkpoint");
  joint->add_option("--set-base", bases[1], "Set base checkpoint");
  joint->add_option("--element-base", bases[2], "Element base checkpoint");

  std::string checkpoint, manifest, clip;
  auto* eval = app.add_subcommand("evaluate", "Score a base or joint checkpoint on a split");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint to evaluate");
  eval->add_option("--manifest", manifest, "Manifest to evaluate on (default: eval manifest)");

  auto* pred = app.add_subcommand("predict", "Emit prediction records for one clip or a manifest");
  add_common(pred);
  pred->add_option("--checkpoint", checkpoint, "Checkpoint to run");
  pred->add_option("--clip", clip, "Clip path (frame directory, .y4m or .ppm)");
  pred->add_option("--manifest", manifest, "Manifest of clips");

  std::string replay_manifest, replay_out;
  auto* replay = app.add_subcommand("replay", "Re-run a command from its run manifest");
  replay->add_option("manifest", replay_manifest, "run_manifest.*.json")->required()->check(CLI::ExistingFile);
  replay->add_option("--output", replay_out, "Output directory (default: the manifest's directory)");

  std::vector<std::string> reversed(argv_in.rbegin(), argv_in.rend() - (argv_in.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : exit_code_for(ErrorCategory::kConfig);
  }
  if (gen->count("--seed") || base->count("--seed") || joint->count("--seed") || eval->count("--seed") ||
      pred->count("--seed"))
    common.seed = seed;
  for (auto* sub : {gen, base, joint, eval, pred}) {
    if (sub->count("--epochs")) common.epochs = epochs;
    if (sub->count("--lr")) common.lr = lr;
    if (sub->count("--clips")) common.clips = clips;
  }

  if (*gen) return cmd_gen_synth(common, err);
  if (*base) return cmd_train_base({common, parse_level(level_text)}, err);
  if (*joint) return cmd_train_joint({common, bases}, err);
  if (*eval) return cmd_evaluate({common, checkpoint, manifest}, err);
  if (*pred) return cmd_predict({common, checkpoint, clip, manifest}, out, err);
  if (*replay) return cmd_replay(replay_manifest, replay_out, err);
  return 1;
}

}  // namespace hieract::cli
