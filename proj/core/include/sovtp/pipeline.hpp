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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sovtp/au_catalog.hpp"
#include "sovtp/geometry.hpp"
#include "sovtp/image.hpp"
#include "sovtp/manifest.hpp"
#include "sovtp/metrics.hpp"
#include "sovtp/prompt_chain.hpp"
#include "sovtp/renderer.hpp"
#include "sovtp/sidecar.hpp"
#include "sovtp/vllm_client.hpp"

namespace sovtp {

// Visual-token budget applied to images sent to the model, in patches of
// patch_size x patch_size pixels. A zero max disables resizing.
struct PixelBudget {
  int min_patches = 180;
  int max_patches = 210;
  int patch_size = 28;
};

// Dimensions (multiples of patch_size) whose area fits the budget while
// keeping the aspect ratio as closely as possible.
std::pair<int, int> fit_pixel_budget(int width, int height, const PixelBudget& budget);

struct PipelineConfig {
  double epsilon = kDefaultEpsilon;
  OverlapCheck overlap_check = OverlapCheck::kAllAccepted;
  double iou_threshold = kDefaultIouThreshold;
  double tau = kDefaultActivationThreshold;
  int top_k = kDefaultTopK;
  int frame_sample_count = 8;  // 0 = every frame
  int frame_width = 600;       // normalization size; 0 keeps the source size
  int frame_height = 400;
  PixelBudget pixel_budget;
  bool contact_sheet = false;  // send one grid image instead of separate frames
  RenderOptions render;
  PromptMode mode = PromptMode::kSovtp;
  ChainParams chain;
  int parallelism = 1;
  std::string annotated_dir;  // when set, annotated frames go to <dir>/<video_id>/
  const AuCatalog* catalog = &AuCatalog::builtin();
  const TemplateSet* templates = &TemplateSet::builtin();
};

// Evenly spaced picks from `available` frames: the centre of each of
// `count` equal bins. All frames when count is 0 or >= available.
std::vector<int> sample_frame_indices(int available, int count);

struct AnnotatedFrame {
  int frame_index = 0;
  std::size_t detected = 0;
  std::size_t kept = 0;
  RenderPlan plan;
  Image image;
};

struct AnnotatedVideo {
  std::string video_id;
  std::vector<TrackedFace> tracks;
  std::vector<AnnotatedFrame> frames;
};

// Samples, normalizes, overlap-filters, tracks, ranks and renders one video.
AnnotatedVideo annotate_video(const SidecarDocument& sidecar, const std::string& frames_dir,
                              const PipelineConfig& cfg);

// Ranking used for the text prompt: each AU's activation averaged over the
// target's sampled observations, hinted by its most frequent dominant emotion.
RankedAUs target_ranked_aus(const TrackedFace& track, const AuCatalog& catalog, double tau, int k);

// PNG payloads (base64) for the model, after the pixel budget is applied.
std::vector<std::string> encode_for_model(const std::vector<Image>& frames, const PipelineConfig& cfg);

struct EntryOutcome {
  EvalRecord record;
  TranscriptLog transcript;
};

// Runs one manifest entry end to end; errors are captured in the record.
EntryOutcome run_entry(const ManifestEntry& entry, const PipelineConfig& cfg, Backend& backend);

struct PipelineResult {
  std::vector<EvalRecord> records;   // manifest order
  TranscriptLog transcript;          // manifest order, then call order
};

// Entries run on up to cfg.parallelism workers; results do not depend on it.
PipelineResult run_pipeline(const std::vector<ManifestEntry>& manifest, const PipelineConfig& cfg,
                            Backend& backend);

}  // namespace sovtp
