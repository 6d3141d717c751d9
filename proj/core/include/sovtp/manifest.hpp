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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sovtp/emotion.hpp"
#include "sovtp/errors.hpp"

namespace sovtp {

// Difficulty band by number of visible faces.
enum class Tier { kEasy, kMedium, kHard };

inline constexpr std::size_t kTierCount = 3;

std::string_view to_string(Tier tier) noexcept;
std::optional<Tier> parse_tier(std::string_view name) noexcept;
// Easy: N > 6, Medium: 3 < N <= 6, Hard: N <= 3.
Tier tier_for_face_count(int visible_faces) noexcept;

struct ManifestEntry {
  std::string video_id;
  std::string frames_dir;    // absolute, or relative to the working directory
  std::string sidecar_path;
  int target_face_id = 1;
  EmotionLabel ground_truth = EmotionLabel::kNeutral;
  Tier tier = Tier::kHard;
};

class ManifestError : public DataError {
 public:
  using DataError::DataError;
};

// JSON Lines, one object per video:
//   {"video_id": "v1", "frames_dir": "v1/frames", "sidecar": "v1/sidecar.json",
//    "target_face_id": 2, "label": "Happiness", "tier": "Easy"}
// Relative paths resolve against the manifest's directory. Blank lines are
// skipped. With check_paths, frames_dir and sidecar must exist.
std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::string& base_dir,
                                          bool check_paths = true);
std::vector<ManifestEntry> load_manifest(const std::string& path, bool check_paths = true);

}  // namespace sovtp
