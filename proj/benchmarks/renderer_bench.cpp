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

#include <benchmark/benchmark.h>

#include <map>

#include "sovtp/au_catalog.hpp"
#include "sovtp/image.hpp"
#include "sovtp/renderer.hpp"

namespace {

using namespace sovtp;

std::vector<TrackedFace> faces(int n) {
  std::vector<TrackedFace> tracks;
  for (int i = 0; i < n; ++i) {
    FaceObservation obs;
    const double x = 10.0 + 70.0 * (i % 8), y = 20.0 + 120.0 * (i / 8);
    obs.box = BoundingBox::make(x, y, x + 60, y + 80);
    for (std::size_t p = 0; p < kLandmarkCount; ++p) {
      obs.landmarks.push_back({x + 5 + static_cast<double>(p % 10) * 5, y + 10 + static_cast<double>(p / 10) * 9});
    }
    obs.au_scores = {{6, 0.9}, {12, 0.8}, {25, 0.7}};
    obs.dominant_emotion_hint = EmotionLabel::kHappiness;
    TrackedFace t;
    t.face_id = i + 1;
    t.observations[0] = obs;
    tracks.push_back(t);
  }
  return tracks;
}

void BM_Rasterize(benchmark::State& state) {
  const auto tracks = faces(static_cast<int>(state.range(0)));
  std::map<int, RankedAUs> ranked;
  for (const auto& t : tracks) ranked[t.face_id] = {{6, 0.9}, {12, 0.8}, {25, 0.7}};
  const auto plan = plan_overlays(0, tracks, ranked, AuCatalog::builtin(), RenderOptions{}, 600, 400);
  const Image frame(600, 400, {90, 120, 150});
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(plan, frame));
}
BENCHMARK(BM_Rasterize)->Arg(1)->Arg(8)->Arg(24);

void BM_EncodePng(benchmark::State& state) {
  Image frame(600, 400);
  for (int y = 0; y < 400; ++y) {
    for (int x = 0; x < 600; ++x) frame.set(x, y, {static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), 64});
  }
  for (auto _ : state) benchmark::DoNotOptimize(encode_png(frame));
}
BENCHMARK(BM_EncodePng);

}  // namespace
