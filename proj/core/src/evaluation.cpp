#include "hieract/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "hieract/error.hpp"
#include "hieract/loss.hpp"
#include "json.hpp"

namespace hieract {
namespace fs = std::filesystem;
using nlohmann::json;

void validate_record(const PredictionRecord& r, const std::array<int, 3>& counts) {
  for (Level l : kAllLevels) {
    if (!r.has(l)) continue;
    const auto& s = r.at(l);
    require(static_cast<int>(s.size()) == counts[level_index(l)], ErrorCategory::kInvalidArgument,
            "record " + r.clip_id + ": " + std::string(level_name(l)) + " scores have wrong length");
    const double sum = std::accumulate(s.begin(), s.end(), 0.0);
    require(std::fabs(sum - 1.0) <= 1e-5, ErrorCategory::kInvalidArgument,
            "record " + r.clip_id + ": " + std::string(level_name(l)) + " scores do not sum to 1");
  }
}

int class_rank(std::span<const double> scores, int cls) {
  const double s = scores[static_cast<std::size_t>(cls)];
  int rank = 0;
  for (int j = 0; j < static_cast<int>(scores.size()); ++j) {
    if (scores[j] > s || (scores[j] == s && j < cls)) ++rank;
  }
  return rank;
}

std::vector<int> top_k_classes(std::span<const double> scores, int k) {
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  idx.resize(static_cast<std::size_t>(std::min<int>(k, static_cast<int>(idx.size()))));
  return idx;
}

int argmax(std::span<const double> scores) {
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

double top_k_accuracy(std::span<const PredictionRecord> records, Level level, int k) {
  require(!records.empty(), ErrorCategory::kInvalidArgument, "top_k_accuracy: empty records");
  require(k >= 1, ErrorCategory::kInvalidArgument, "top_k_accuracy: k must be >= 1");
  std::size_t hits = 0;
  for (const auto& r : records) {
    const auto& s = r.at(level);
    require(k <= static_cast<int>(s.size()), ErrorCategory::kInvalidArgument,
            "top_k_accuracy: k exceeds class count");
    if (class_rank(s, r.truth.at(level)) < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double mean_class_accuracy(std::span<const PredictionRecord> records, Level level) {
  require(!records.empty(), ErrorCategory::kInvalidArgument, "mean_class_accuracy: empty records");
  std::map<int, std::pair<int, int>> tally;  // class -> (correct, total)
  for (const auto& r : records) {
    const int truth = r.truth.at(level);
    auto& t = tally[truth];
    t.second += 1;
    if (class_rank(r.at(level), truth) == 0) t.first += 1;
  }
  require(!tally.empty(), ErrorCategory::kInvalidArgument, "mean_class_accuracy: all classes empty");
  double sum = 0.0;
  for (const auto& [cls, t] : tally) sum += static_cast<double>(t.first) / t.second;
  return sum / static_cast<double>(tally.size());
}

std::vector<double> aggregate_clips(std::span<const std::vector<double>> scores) {
  require(!scores.empty(), ErrorCategory::kInvalidArgument, "aggregate_clips: need at least one clip");
  std::vector<double> out(scores[0].size(), 0.0);
  for (const auto& s : scores) {
    require(s.size() == out.size(), ErrorCategory::kInvalidArgument, "aggregate_clips: length mismatch");
    for (std::size_t j = 0; j < s.size(); ++j) out[j] += s[j];
  }
  for (double& v : out) v /= static_cast<double>(scores.size());
  return out;
}

std::vector<double> aggregate_logits(std::span<const std::vector<double>> logits) {
  return softmax(aggregate_clips(logits));
}

LabelTriple predicted_triple(const PredictionRecord& r) {
  for (Level l : kAllLevels)
    require(r.has(l), ErrorCategory::kInvalidArgument, "record " + r.clip_id + " lacks " + std::string(level_name(l)));
  return {argmax(r.at(Level::kEvent)), argmax(r.at(Level::kSet)), argmax(r.at(Level::kElement))};
}

double hierarchy_consistency_rate(std::span<const PredictionRecord> records, const Taxonomy& taxonomy) {
  if (records.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& r : records)
    if (taxonomy.validate(predicted_triple(r))) ++ok;
  return static_cast<double>(ok) / static_cast<double>(records.size());
}

EvaluationReport evaluate_records(std::span<const PredictionRecord> records, const Taxonomy& taxonomy,
                                  std::size_t max_confusions) {
  require(!records.empty(), ErrorCategory::kInvalidArgument, "evaluate: empty records");
  EvaluationReport report;
  report.records = records.size();
  bool all_levels = true;
  for (Level l : kAllLevels) {
    const bool present = records.front().has(l);
    all_levels = all_levels && present;
    if (!present) continue;
    LevelReport lr;
    lr.level = l;
    lr.class_count = taxonomy.count(l);
    lr.records = records.size();
    lr.top1 = top_k_accuracy(records, l, 1);
    lr.top5_k = std::min(5, lr.class_count);
    lr.top5 = top_k_accuracy(records, l, lr.top5_k);
    lr.mean = mean_class_accuracy(records, l);
    lr.per_class_support.assign(static_cast<std::size_t>(lr.class_count), 0);
    std::vector<int> correct(static_cast<std::size_t>(lr.class_count), 0);
    std::map<std::pair<int, int>, int> confusions;
    for (const auto& r : records) {
      const int truth = r.truth.at(l);
      const int pred = argmax(r.at(l));
      lr.per_class_support[truth] += 1;
      if (pred == truth) correct[truth] += 1;
      else confusions[{truth, pred}] += 1;
    }
    for (int c = 0; c < lr.class_count; ++c) {
      if (lr.per_class_support[c] > 0) lr.per_class_accuracy.emplace_back(static_cast<double>(correct[c]) / lr.per_class_support[c]);
      else lr.per_class_accuracy.emplace_back(std::nullopt);
    }
    for (const auto& [key, n] : confusions) lr.top_confusions.push_back({key.first, key.second, n});
    std::stable_sort(lr.top_confusions.begin(), lr.top_confusions.end(),
                     [](const Confusion& a, const Confusion& b) { return a.count > b.count; });
    if (lr.top_confusions.size() > max_confusions) lr.top_confusions.resize(max_confusions);
    report.levels.push_back(std::move(lr));
  }
  if (all_levels) report.consistency_rate = hierarchy_consistency_rate(records, taxonomy);
  return report;
}

std::string report_to_json(const EvaluationReport& report) {
  json j;
  j["records"] = report.records;
  json levels = json::array();
  for (const auto& lr : report.levels) {
    json per_class = json::array();
    for (std::size_t c = 0; c < lr.per_class_accuracy.size(); ++c) {
      per_class.push_back({{"class", c},
                           {"support", lr.per_class_support[c]},
                           {"accuracy", lr.per_class_accuracy[c] ? json(*lr.per_class_accuracy[c]) : json(nullptr)}});
    }
    json conf = json::array();
    for (const auto& c : lr.top_confusions) conf.push_back({{"truth", c.truth}, {"predicted", c.predicted}, {"count", c.count}});
    levels.push_back({{"level", level_name(lr.level)},
                      {"class_count", lr.class_count},
                      {"top1", lr.top1},
                      {"top5", lr.top5},
                      {"top5_k", lr.top5_k},
                      {"mean", lr.mean},
                      {"per_class", per_class},
                      {"top_confusions", conf}});
  }
  j["levels"] = levels;
  j["consistency_rate"] = report.consistency_rate ? json(*report.consistency_rate) : json(nullptr);
  return j.dump(2);
}

std::string report_to_table(const EvaluationReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "records: " << report.records << "\n";
  os << std::left << std::setw(10) << "level" << std::right << std::setw(9) << "classes" << std::setw(9) << "top-1"
     << std::setw(9) << "top-5" << std::setw(9) << "mean" << "\n";
  for (const auto& lr : report.levels) {
    os << std::left << std::setw(10) << level_name(lr.level) << std::right << std::setw(9) << lr.class_count
       << std::setw(9) << 100.0 * lr.top1 << std::setw(9) << 100.0 * lr.top5 << std::setw(9) << 100.0 * lr.mean;
    if (lr.top5_k != 5) os << "  (top-5 column is top-" << lr.top5_k << ")";
    os << "\n";
  }
  if (report.consistency_rate) os << "hierarchy consistency: " << 100.0 * *report.consistency_rate << "%\n";
  for (const auto& lr : report.levels) {
    if (lr.top_confusions.empty()) continue;
    os << level_name(lr.level) << " confusions (truth -> predicted: count):";
    for (const auto& c : lr.top_confusions) os << " " << c.truth << "->" << c.predicted << ":" << c.count;
    os << "\n";
  }
  return os.str();
}

void write_per_class_data(const fs::path& dir, const EvaluationReport& report) {
  fs::create_directories(dir);
  for (const auto& lr : report.levels) {
    std::ofstream out(dir / ("per_class_" + std::string(level_name(lr.level)) + ".csv"));
    require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write per-class data in " + dir.string());
    out << "class_id,support,accuracy\n";
    for (std::size_t c = 0; c < lr.per_class_accuracy.size(); ++c) {
      out << c << ',' << lr.per_class_support[c] << ',';
      if (lr.per_class_accuracy[c]) out << std::setprecision(17) << *lr.per_class_accuracy[c];
      out << '\n';
    }
  }
}

std::string prediction_to_json_line(const PredictionRecord& r, const Taxonomy* taxonomy) {
  json j;
  j["clip"] = r.clip_id;
  j["truth"] = {r.truth.event_id, r.truth.set_id, r.truth.element_id};
  json scores = json::object();
  for (Level l : kAllLevels)
    if (r.has(l)) scores[std::string(level_name(l))] = r.at(l);
  j["scores"] = scores;
  bool all = true;
  for (Level l : kAllLevels) all = all && r.has(l);
  if (all) {
    const LabelTriple p = predicted_triple(r);
    j["predicted"] = {p.event_id, p.set_id, p.element_id};
    if (taxonomy) j["consistent"] = taxonomy->validate(p);
  } else {
    json pred = json::object();
    for (Level l : kAllLevels)
      if (r.has(l)) pred[std::string(level_name(l))] = argmax(r.at(l));
    j["predicted"] = pred;
  }
  return j.dump();
}

PredictionRecord prediction_from_json_line(const std::string& line) {
  PredictionRecord r;
  try {
    const json j = json::parse(line);
    r.clip_id = j.at("clip").get<std::string>();
    const auto t = j.at("truth").get<std::vector<int>>();
    require(t.size() == 3, ErrorCategory::kData, "prediction line: truth must have 3 ids");
    r.truth = {t[0], t[1], t[2]};
    for (Level l : kAllLevels) {
      const std::string key(level_name(l));
      if (j.at("scores").contains(key)) r.scores[level_index(l)] = j.at("scores").at(key).get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCategory::kData, std::string("malformed prediction line: ") + e.what());
  }
  return r;
}

std::vector<PredictionRecord> read_predictions(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open predictions " + path.string());
  std::vector<PredictionRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(prediction_from_json_line(line));
  return out;
}

}  // namespace hieract
