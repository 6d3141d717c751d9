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

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sovtp/emotion.hpp"
#include "sovtp/manifest.hpp"

namespace sovtp {

struct EvalRecord {
  std::string video_id;
  Tier tier = Tier::kHard;
  EmotionLabel ground_truth = EmotionLabel::kNeutral;
  Prediction prediction;                 // nullopt = Unparseable
  std::vector<double> stage_latencies;   // seconds, one per successful backend call
  double total_seconds = 0.0;
  std::string error;                     // empty when the entry ran cleanly
  std::string error_kind;                // "", "data" or "backend"

  bool correct() const noexcept { return prediction && *prediction == ground_truth; }
};

enum class F1Averaging { kMacro, kMicro };

std::string_view to_string(F1Averaging a) noexcept;
std::optional<F1Averaging> parse_f1_averaging(std::string_view name) noexcept;

struct SliceMetrics {
  std::size_t count = 0;
  std::size_t correct = 0;
  std::optional<double> accuracy;  // percent; nullopt for an empty slice
  std::optional<double> f1;        // percent
};

// Row index kEmotionCount of the confusion matrix holds Unparseable answers.
inline constexpr std::size_t kConfusionRows = kEmotionCount + 1;

struct Report {
  F1Averaging averaging = F1Averaging::kMacro;
  std::array<SliceMetrics, kTierCount> tiers{};
  SliceMetrics total;
  std::array<std::size_t, kEmotionCount> per_emotion_count{};
  std::array<std::optional<double>, kEmotionCount> per_emotion_accuracy{};
  // confusion[predicted][truth]
  std::array<std::array<std::size_t, kEmotionCount>, kConfusionRows> confusion{};
  double mean_inference_seconds = 0.0;
  std::size_t error_count = 0;
};

// F1 over the seven classes, in percent. Macro: unweighted mean of per-class
// F1, a class with no true and no predicted instances scoring 0. Micro:
// pooled precision/recall, Unparseable counting against recall only.
double f1_score(const std::vector<EvalRecord>& records, F1Averaging averaging);

// Throws ContractViolation for an empty record set.
Report evaluate(const std::vector<EvalRecord>& records, F1Averaging averaging = F1Averaging::kMacro);

// "json", "table" or "markdown". Throws UsageError for anything else.
std::string emit_report(const Report& report, std::string_view format);

// Two decimals; "—" for an empty slice.
std::string format_percent(const std::optional<double>& value);

std::string to_jsonl(const EvalRecord& record);
EvalRecord eval_record_from_json(std::string_view line);
void write_records(const std::string& path, const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_records(const std::string& path);

}  // namespace sovtp
