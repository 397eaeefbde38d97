#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hieract/config.hpp"
#include "hieract/taxonomy.hpp"

namespace hieract::cli {

/// Flags shared by every command. Unset optionals leave the config untouched.
struct CommonArgs {
  std::string config_path;  // empty: built-in desk defaults
  std::string output_dir;
  std::string data_dir;     // shorthand for <dir>/taxonomy.tsv, train.tsv, test.tsv
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> clips;
  bool quiet = false;
  std::vector<std::string> argv;  // recorded verbatim in the run manifest
};

struct TrainBaseArgs {
  CommonArgs common;
  Level level = Level::kEvent;
};

struct TrainJointArgs {
  CommonArgs common;
  std::array<std::string, 3> bases;  // overrides paths.base_checkpoints
};

struct EvaluateArgs {
  CommonArgs common;
  std::string checkpoint;  // base or joint; default paths.joint_checkpoint
  std::string manifest;    // default paths.eval_manifest
};

struct PredictArgs {
  CommonArgs common;
  std::string checkpoint;
  std::string clip;      // single clip path (frame directory, .y4m or .ppm)
  std::string manifest;  // or a whole manifest
};

/// Applies flag overrides on top of the config file (or the desk defaults).
RunConfig resolve_config(const CommonArgs& args);

int cmd_gen_synth(const CommonArgs& args, std::ostream& log);
int cmd_train_base(const TrainBaseArgs& args, std::ostream& log);
int cmd_train_joint(const TrainJointArgs& args, std::ostream& log);
int cmd_evaluate(const EvaluateArgs& args, std::ostream& log);
int cmd_predict(const PredictArgs& args, std::ostream& out, std::ostream& log);
/// Re-runs the command recorded in a run manifest with its config snapshot.
int cmd_replay(const std::filesystem::path& run_manifest, const std::string& output_dir, std::ostream& log);

/// Parses argv and dispatches. Errors are reported on `err` and mapped to exit codes.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace hieract::cli
