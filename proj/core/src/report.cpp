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

#include <cstdio>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "sovtp/errors.hpp"
#include "sovtp/metrics.hpp"

namespace sovtp {

using nlohmann::ordered_json;

std::string format_percent(const std::optional<double>& value) {
  if (!value) return "—";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *value);
  return buf;
}

namespace {

constexpr std::array<std::string_view, 4> kColumns = {"Easy", "Medium", "Hard", "Total"};

const SliceMetrics& column(const Report& r, std::size_t i) {
  return i < kTierCount ? r.tiers[i] : r.total;
}

ordered_json slice_json(const SliceMetrics& m) {
  ordered_json j;
  j["videos"] = m.count;
  j["correct"] = m.correct;
  j["accuracy"] = m.accuracy ? ordered_json(*m.accuracy) : ordered_json(nullptr);
  j["f1"] = m.f1 ? ordered_json(*m.f1) : ordered_json(nullptr);
  return j;
}

std::string json_report(const Report& r) {
  ordered_json doc;
  doc["f1_averaging"] = std::string(to_string(r.averaging));
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    doc["slices"][std::string(kColumns[i])] = slice_json(column(r, i));
  }
  for (auto label : kAllEmotions) {
    const std::size_t c = index_of(label);
    ordered_json e;
    e["videos"] = r.per_emotion_count[c];
    e["accuracy"] = r.per_emotion_accuracy[c] ? ordered_json(*r.per_emotion_accuracy[c])
                                              : ordered_json(nullptr);
    doc["per_emotion"][std::string(to_string(label))] = e;
  }
  ordered_json confusion;
  for (std::size_t row = 0; row < kConfusionRows; ++row) {
    const std::string name = row < kEmotionCount ? std::string(to_string(kAllEmotions[row]))
                                                 : std::string(kUnparseableName);
    ordered_json cells;
    for (auto truth : kAllEmotions) {
      cells[std::string(to_string(truth))] = r.confusion[row][index_of(truth)];
    }
    confusion[name] = cells;
  }
  doc["confusion_predicted_by_truth"] = confusion;
  doc["mean_inference_seconds"] = r.mean_inference_seconds;
  doc["errors"] = r.error_count;
  return doc.dump(2) + "\n";
}

// Pads by code points so "—" lines up with ASCII cells.
std::string pad_left(const std::string& s, std::size_t width) {
  std::size_t points = 0;
  for (unsigned char c : s) points += (c & 0xC0) != 0x80 ? 1 : 0;
  return points >= width ? s : std::string(width - points, ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string table_report(const Report& r) {
  std::ostringstream out;
  constexpr std::size_t kHead = 10;
  constexpr std::size_t kCell = 9;
  out << pad_right("", kHead);
  for (auto c : kColumns) out << pad_left(std::string(c), kCell);
  out << "\n";
  out << pad_right("Acc (%)", kHead);
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << pad_left(format_percent(column(r, i).accuracy), kCell);
  out << "\n";
  out << pad_right("F@1", kHead);
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << pad_left(format_percent(column(r, i).f1), kCell);
  out << "\n";
  out << pad_right("Videos", kHead);
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << pad_left(std::to_string(column(r, i).count), kCell);
  out << "\n\n";

  out << "Per-emotion accuracy (%)\n";
  for (auto label : kAllEmotions) {
    const std::size_t c = index_of(label);
    out << "  " << pad_right(std::string(to_string(label)), 10)
        << pad_left(format_percent(r.per_emotion_accuracy[c]), kCell) << "  (n=" << r.per_emotion_count[c]
        << ")\n";
  }
  char secs[32];
  std::snprintf(secs, sizeof(secs), "%.2f", r.mean_inference_seconds);
  out << "\nF1 averaging: " << to_string(r.averaging) << "\n";
  out << "Mean inference time (s): " << secs << "\n";
  out << "Entries with errors: " << r.error_count << "\n";
  return out.str();
}

std::string markdown_report(const Report& r) {
  std::ostringstream out;
  out << "| |";
  for (auto c : kColumns) out << " " << c << " |";
  out << "\n|---|---:|---:|---:|---:|\n| Acc (%) |";
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << " " << format_percent(column(r, i).accuracy) << " |";
  out << "\n| F@1 |";
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << " " << format_percent(column(r, i).f1) << " |";
  out << "\n";
  return out.str();
}

}  // namespace

std::string emit_report(const Report& report, std::string_view format) {
  if (format == "json") return json_report(report);
  if (format == "table") return table_report(report);
  if (format == "markdown") return markdown_report(report);
  throw UsageError("unknown report format '" + std::string(format) + "' (expected json, table or markdown)");
}

}  // namespace sovtp
