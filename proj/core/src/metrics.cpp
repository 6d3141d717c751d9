/* Copyright 2026 The SoVTP Toolkit Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "sovtp/metrics.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sovtp/errors.hpp"

namespace sovtp {

using nlohmann::json;

std::string_view to_string(F1Averaging a) noexcept {
  return a == F1Averaging::kMacro ? "macro" : "micro";
}

std::optional<F1Averaging> parse_f1_averaging(std::string_view name) noexcept {
  if (name == "macro") return F1Averaging::kMacro;
  if (name == "micro") return F1Averaging::kMicro;
  return std::nullopt;
}

double f1_score(const std::vector<EvalRecord>& records, F1Averaging averaging) {
  std::array<double, kEmotionCount> tp{}, fp{}, fn{};
  for (const auto& r : records) {
    const std::size_t truth = index_of(r.ground_truth);
    if (r.prediction) {
      const std::size_t pred = index_of(*r.prediction);
      if (pred == truth) {
        tp[truth] += 1;
      } else {
        fp[pred] += 1;
        fn[truth] += 1;
      }
    } else {
      fn[truth] += 1;
    }
  }
  if (averaging == F1Averaging::kMacro) {
    double sum = 0.0;
    for (std::size_t c = 0; c < kEmotionCount; ++c) {
      const double denom = 2 * tp[c] + fp[c] + fn[c];
      sum += denom > 0 ? 2 * tp[c] / denom : 0.0;
    }
    return 100.0 * sum / static_cast<double>(kEmotionCount);
  }
  double tps = 0, fps = 0, fns = 0;
  for (std::size_t c = 0; c < kEmotionCount; ++c) {
    tps += tp[c];
    fps += fp[c];
    fns += fn[c];
  }
  const double denom = 2 * tps + fps + fns;
  return denom > 0 ? 100.0 * 2 * tps / denom : 0.0;
}

namespace {

SliceMetrics slice(const std::vector<EvalRecord>& records, F1Averaging averaging) {
  SliceMetrics m;
  m.count = records.size();
  for (const auto& r : records) m.correct += r.correct() ? 1 : 0;
  if (m.count > 0) {
    m.accuracy = 100.0 * static_cast<double>(m.correct) / static_cast<double>(m.count);
    m.f1 = f1_score(records, averaging);
  }
  return m;
}

}  // namespace

Report evaluate(const std::vector<EvalRecord>& records, F1Averaging averaging) {
  if (records.empty()) throw ContractViolation("evaluate needs at least one record");
  Report report;
  report.averaging = averaging;

  std::array<std::vector<EvalRecord>, kTierCount> by_tier;
  std::array<std::size_t, kEmotionCount> correct_by_emotion{};
  double seconds = 0.0;
  for (const auto& r : records) {
    by_tier[static_cast<std::size_t>(r.tier)].push_back(r);
    const std::size_t truth = index_of(r.ground_truth);
    report.per_emotion_count[truth] += 1;
    correct_by_emotion[truth] += r.correct() ? 1 : 0;
    const std::size_t row = r.prediction ? index_of(*r.prediction) : kEmotionCount;
    report.confusion[row][truth] += 1;
    seconds += r.total_seconds;
    report.error_count += r.error.empty() ? 0 : 1;
  }
  for (std::size_t t = 0; t < kTierCount; ++t) report.tiers[t] = slice(by_tier[t], averaging);
  report.total = slice(records, averaging);
  for (std::size_t c = 0; c < kEmotionCount; ++c) {
    if (report.per_emotion_count[c] > 0) {
      report.per_emotion_accuracy[c] = 100.0 * static_cast<double>(correct_by_emotion[c]) /
                                       static_cast<double>(report.per_emotion_count[c]);
    }
  }
  report.mean_inference_seconds = seconds / static_cast<double>(records.size());
  return report;
}

std::string to_jsonl(const EvalRecord& r) {
  json rec = {
      {"video_id", r.video_id},
      {"tier", std::string(to_string(r.tier))},
      {"ground_truth", std::string(to_string(r.ground_truth))},
      {"prediction", prediction_name(r.prediction)},
      {"stage_latencies", r.stage_latencies},
      {"total_seconds", r.total_seconds},
      {"error", r.error},
      {"error_kind", r.error_kind},
  };
  return rec.dump();
}

EvalRecord eval_record_from_json(std::string_view line) {
  try {
    const json rec = json::parse(line);
    EvalRecord r;
    r.video_id = rec.at("video_id").get<std::string>();
    auto tier = parse_tier(rec.at("tier").get<std::string>());
    if (!tier) throw DataError("record '" + r.video_id + "': unknown tier");
    r.tier = *tier;
    auto truth = parse_label(rec.at("ground_truth").get<std::string>());
    if (!truth) throw DataError("record '" + r.video_id + "': unknown ground truth label");
    r.ground_truth = *truth;
    r.prediction = parse_prediction_name(rec.at("prediction").get<std::string>());
    r.stage_latencies = rec.value("stage_latencies", std::vector<double>{});
    r.total_seconds = rec.value("total_seconds", 0.0);
    r.error = rec.value("error", "");
    r.error_kind = rec.value("error_kind", "");
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed eval record: ") + e.what());
  }
}

void write_records(const std::string& path, const std::vector<EvalRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write records file " + path);
  for (const auto& r : records) out << to_jsonl(r) << '\n';
}

std::vector<EvalRecord> read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open records file " + path);
  std::vector<EvalRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(eval_record_from_json(line));
  }
  return records;
}

}  // namespace sovtp
