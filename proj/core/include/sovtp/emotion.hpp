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
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace sovtp {

enum class EmotionLabel {
  kSurprise,
  kFear,
  kDisgust,
  kAnger,
  kHappiness,
  kSadness,
  kNeutral,
};

inline constexpr std::size_t kEmotionCount = 7;

inline constexpr std::array<EmotionLabel, kEmotionCount> kAllEmotions = {
    EmotionLabel::kSurprise, EmotionLabel::kFear,    EmotionLabel::kDisgust, EmotionLabel::kAnger,
    EmotionLabel::kHappiness, EmotionLabel::kSadness, EmotionLabel::kNeutral,
};

// Canonical name, e.g. "Happiness".
std::string_view to_string(EmotionLabel label) noexcept;

// Case-insensitive match against the seven canonical names only.
std::optional<EmotionLabel> parse_label(std::string_view text) noexcept;

inline std::size_t index_of(EmotionLabel label) noexcept { return static_cast<std::size_t>(label); }

// A model's final answer: one of the seven labels, or nullopt when the
// answer could not be mapped (Unparseable).
using Prediction = std::optional<EmotionLabel>;

inline constexpr std::string_view kUnparseableName = "Unparseable";

std::string prediction_name(const Prediction& p);
Prediction parse_prediction_name(std::string_view text);

}  // namespace sovtp
