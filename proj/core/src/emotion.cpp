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

#include "sovtp/emotion.hpp"

#include <algorithm>
#include <cctype>

#include "sovtp/errors.hpp"

namespace sovtp {
namespace {

constexpr std::array<std::string_view, kEmotionCount> kNames = {
    "Surprise", "Fear", "Disgust", "Anger", "Happiness", "Sadness", "Neutral",
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view to_string(EmotionLabel label) noexcept { return kNames[index_of(label)]; }

std::optional<EmotionLabel> parse_label(std::string_view text) noexcept {
  text = trim(text);
  for (auto label : kAllEmotions) {
    if (iequals(text, kNames[index_of(label)])) return label;
  }
  return std::nullopt;
}

std::string prediction_name(const Prediction& p) {
  return p ? std::string(to_string(*p)) : std::string(kUnparseableName);
}

Prediction parse_prediction_name(std::string_view text) {
  if (iequals(trim(text), kUnparseableName)) return std::nullopt;
  if (auto label = parse_label(text)) return label;
  throw DataError("unknown prediction label '" + std::string(text) + "'");
}

}  // namespace sovtp
