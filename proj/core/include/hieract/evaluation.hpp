#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hieract/taxonomy.hpp"

namespace hieract {

/// How per-clip outputs are combined when testing on several clips.
enum class ScoreAggregation { kProbability, kLogit };

/// Post-softmax scores for the levels a model predicts (empty vector = level absent).
struct PredictionRecord {
  std::string clip_id;
  LabelTriple truth;
  std::array<std::vector<double>, 3> scores;

  bool has(Level level) const { return !scores[level_index(level)].empty(); }
  const std::vector<double>& at(Level level) const { return scores[level_index(level)]; }
};

/// Checks lengths against class counts and simplex sums within 1e-5.
void validate_record(const PredictionRecord& record, const std::array<int, 3>& class_counts);

/// 0-based rank of `cls` when sorting by descending score, lower index first on ties.
int class_rank(std::span<const double> scores, int cls);
/// Indices of the k best classes under the same ordering.
std::vector<int> top_k_classes(std::span<const double> scores, int k);
int argmax(std::span<const double> scores);

double top_k_accuracy(std::span<const PredictionRecord> records, Level level, int k);
/// Unweighted mean of per-class top-1 recall over classes present in `records`.
double mean_class_accuracy(std::span<const PredictionRecord> records, Level level);

/// Element-wise mean of per-clip probability vectors.
std::vector<double> aggregate_clips(std::span<const std::vector<double>> scores);
/// softmax(mean of per-clip logits); the alternative aggregation mode.
std::vector<double> aggregate_logits(std::span<const std::vector<double>> logits);

/// Argmax triple of a record with all three levels.
LabelTriple predicted_triple(const PredictionRecord& record);
double hierarchy_consistency_rate(std::span<const PredictionRecord> records, const Taxonomy& taxonomy);

struct Confusion {
  int truth = 0;
  int predicted = 0;
  int count = 0;
};

struct LevelReport {
  Level level = Level::kEvent;
  int class_count = 0;
  std::size_t records = 0;
  double top1 = 0.0;
  int top5_k = 5;  // min(5, class_count)
  double top5 = 0.0;
  double mean = 0.0;
  std::vector<std::optional<double>> per_class_accuracy;
  std::vector<int> per_class_support;
  std::vector<Confusion> top_confusions;
};

struct EvaluationReport {
  std::size_t records = 0;
  std::vector<LevelReport> levels;
  std::optional<double> consistency_rate;  // when all three levels are present
};

EvaluationReport evaluate_records(std::span<const PredictionRecord> records, const Taxonomy& taxonomy,
                                  std::size_t max_confusions = 5);

std::string report_to_json(const EvaluationReport& report);
std::string report_to_table(const EvaluationReport& report);
/// One CSV per level: class_id,support,accuracy (bar-plot data).
void write_per_class_data(const std::filesystem::path& dir, const EvaluationReport& report);

std::string prediction_to_json_line(const PredictionRecord& record, const Taxonomy* taxonomy = nullptr);
PredictionRecord prediction_from_json_line(const std::string& line);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

}  // namespace hieract
