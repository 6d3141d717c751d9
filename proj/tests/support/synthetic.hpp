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

#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "sovtp/geometry.hpp"
#include "sovtp/image.hpp"
#include "sovtp/manifest.hpp"
#include "sovtp/renderer.hpp"

namespace sovtp::testing {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag = "sovtp");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(std::string_view name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_file(const fs::path& path, std::string_view text);
std::string read_file(const fs::path& path);

// 68 distinct points spread over the interior of `box`.
std::vector<Point> synthetic_landmarks(const BoundingBox& box);

// Smooth colour field; different seeds give different images.
Image gradient_image(int width, int height, int seed);

struct VideoSpec {
  std::string video_id = "vid";
  int frame_count = 3;
  int width = 320;
  int height = 240;
  bool occluded_face = true;  // a small face fully inside face 1 on frame 0
  bool masks = false;         // body mask for face 2
};

struct SyntheticVideo {
  std::string video_id;
  fs::path frames_dir;
  fs::path sidecar;
};

// Two faces drifting right; face 1 shows Happiness AUs, face 2 Sadness AUs.
SyntheticVideo write_synthetic_video(const fs::path& root, const VideoSpec& spec = {});

// "REASONING: ...\nANSWER: ..."
std::string stage_reply(std::string_view reasoning, std::string_view answer);

// Stub script answering every stage, ending with `final_answer`.
std::string stub_script(std::string_view final_answer);

std::string manifest_line(const std::string& video_id, const fs::path& frames_dir, const fs::path& sidecar,
                          int target, std::string_view label, std::string_view tier);

// Uniform random box inside [0,w) x [0,h) with integer corners.
BoundingBox random_int_box(std::mt19937_64& rng, int w, int h, int max_side);
BoundingBox random_box(std::mt19937_64& rng, double w, double h, double max_side);

// Random plan exercising every primitive, including off-frame anchors,
// boxes touching the border and masks.
RenderPlan random_plan(std::mt19937_64& rng, int width, int height);

}  // namespace sovtp::testing
