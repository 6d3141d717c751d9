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

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sovtp/errors.hpp"
#include "sovtp/renderer.hpp"
#include "synthetic.hpp"

namespace sovtp {
namespace {

FaceObservation obs(int frame, const BoundingBox& b, bool landmarks) {
  FaceObservation o;
  o.frame_index = frame;
  o.box = b;
  if (landmarks) o.landmarks = testing::synthetic_landmarks(b);
  return o;
}

TrackedFace track(int id, std::initializer_list<FaceObservation> list) {
  TrackedFace t{id, {}};
  for (const auto& o : list) t.observations.emplace(o.frame_index, o);
  return t;
}

std::vector<bool> changed(const Image& a, const Image& b) {
  std::vector<bool> out(static_cast<std::size_t>(a.width() * a.height()));
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) out[static_cast<std::size_t>(y * a.width() + x)] = !(a.at(x, y) == b.at(x, y));
  }
  return out;
}

TEST(AuTagText, Format) { EXPECT_EQ(au_tag_text(AuCatalog::builtin().at(12)), "AU12 Lip Corner Puller"); }

TEST(PlanOverlays, EmptyTracksGiveEmptyPlan) {
  const auto plan = plan_overlays(0, {}, {}, AuCatalog::builtin(), {}, 100, 80);
  EXPECT_TRUE(plan.overlays.empty());
  EXPECT_EQ(plan.width, 100);
}

TEST(PlanOverlays, OrderedByFaceIdAndSkipsAbsentTracks) {
  const auto b = BoundingBox::make(10, 10, 40, 40);
  const std::vector<TrackedFace> tracks = {track(2, {obs(0, b, true)}), track(1, {obs(0, b, true)}),
                                           track(3, {obs(1, b, true)})};
  const auto plan = plan_overlays(0, tracks, {}, AuCatalog::builtin(), {}, 100, 80);
  ASSERT_EQ(plan.overlays.size(), 2u);
  EXPECT_EQ(plan.overlays[0].face_id, 1);
  EXPECT_EQ(plan.overlays[1].face_id, 2);
}

TEST(PlanOverlays, MissingLandmarksStackTagsAtBoxCorner) {
  const auto b = BoundingBox::make(20, 30, 80, 90);
  const std::map<int, RankedAUs> ranked = {{1, {{6, 0.9}, {12, 0.8}, {25, 0.6}}}};
  const auto plan = plan_overlays(0, {track(1, {obs(0, b, false)})}, ranked, AuCatalog::builtin(), {}, 200, 200);
  ASSERT_EQ(plan.overlays.size(), 1u);
  const auto& o = plan.overlays[0];
  EXPECT_TRUE(o.draw_box);
  EXPECT_TRUE(o.draw_number);
  EXPECT_TRUE(o.landmarks.empty());
  ASSERT_EQ(o.au_tags.size(), 3u);
  const int line = 11 * plan.style.font_scale + 2 * plan.style.text_padding;
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(o.au_tags[i].placement, TagPlacement::kTopLeft);
    EXPECT_DOUBLE_EQ(o.au_tags[i].anchor.x, 20.0);
    EXPECT_DOUBLE_EQ(o.au_tags[i].anchor.y, 30.0 + i * line);
  }
  EXPECT_EQ(o.au_tags[0].text, "AU6 Cheek Raiser");
}

TEST(PlanOverlays, LandmarkAnchorsUseCentroids) {
  const auto b = BoundingBox::make(20, 30, 80, 90);
  const auto o = obs(0, b, true);
  const auto plan = plan_overlays(0, {track(1, {o})}, {{1, {{12, 0.8}}}}, AuCatalog::builtin(), {}, 200, 200);
  const auto& tag = plan.overlays[0].au_tags.at(0);
  EXPECT_EQ(tag.placement, TagPlacement::kCentered);
  EXPECT_DOUBLE_EQ(tag.anchor.x, (o.landmarks[48].x + o.landmarks[54].x) / 2);
  EXPECT_DOUBLE_EQ(tag.anchor.y, (o.landmarks[48].y + o.landmarks[54].y) / 2);
  EXPECT_EQ(plan.overlays[0].landmarks.size(), 68u);
}

TEST(PlanOverlays, LayersToggleIndependently) {
  const auto b = BoundingBox::make(20, 30, 80, 90);
  const std::map<int, RankedAUs> ranked = {{1, {{12, 0.8}}}};
  for (int bits = 0; bits < 16; ++bits) {
    RenderOptions opts;
    opts.layers = {(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0, (bits & 8) != 0, false};
    const auto plan = plan_overlays(0, {track(1, {obs(0, b, true)})}, ranked, AuCatalog::builtin(), opts, 200, 200);
    const auto& o = plan.overlays.at(0);
    EXPECT_EQ(o.draw_box, opts.layers.boxes);
    EXPECT_EQ(o.draw_number, opts.layers.numbers);
    EXPECT_EQ(!o.landmarks.empty(), opts.layers.landmarks);
    EXPECT_EQ(!o.au_tags.empty(), opts.layers.au_tags);
  }
}

TEST(PlanOverlays, MasksLoadedOnlyWhenEnabled) {
  auto o = obs(0, BoundingBox::make(10, 10, 30, 30), false);
  o.body_mask = "m.png";
  int loads = 0;
  const MaskLoader loader = [&](const std::string& ref) {
    ++loads;
    EXPECT_EQ(ref, "m.png");
    return std::make_shared<const Image>(50, 40, Rgb{255, 255, 255});
  };
  RenderOptions opts;
  EXPECT_FALSE(plan_overlays(0, {track(1, {o})}, {}, AuCatalog::builtin(), opts, 50, 40, loader).overlays[0].mask);
  EXPECT_EQ(loads, 0);
  opts.layers.masks = true;
  EXPECT_TRUE(plan_overlays(0, {track(1, {o})}, {}, AuCatalog::builtin(), opts, 50, 40, loader).overlays[0].mask);
  EXPECT_THROW(plan_overlays(0, {track(1, {o})}, {}, AuCatalog::builtin(), opts, 60, 40, loader), DataError);
}

TEST(Rasterize, EmptyPlanIsIdentity) {
  const Image img = testing::gradient_image(64, 48, 3);
  RenderPlan plan;
  plan.width = 64;
  plan.height = 48;
  EXPECT_EQ(rasterize(plan, img), img);
}

TEST(Rasterize, AllLayersOffIsIdentity) {
  const Image img = testing::gradient_image(120, 90, 1);
  RenderOptions opts;
  opts.layers = {false, false, false, false, false};
  auto o = obs(0, BoundingBox::make(10, 10, 60, 70), true);
  o.body_mask = "m";
  const auto plan = plan_overlays(0, {track(1, {o})}, {{1, {{12, 0.9}}}}, AuCatalog::builtin(), opts, 120, 90,
                                  [](const std::string&) { return std::make_shared<const Image>(120, 90, Rgb{1, 1, 1}); });
  EXPECT_EQ(rasterize(plan, img), img);
}

TEST(Rasterize, SingleBoxChangesExactlyTheOutline) {
  const Image black(100, 100);
  RenderPlan plan;
  plan.width = plan.height = 100;
  plan.style.box_thickness = 1;
  OverlaySpec spec;
  spec.face_id = 1;
  spec.box = BoundingBox::make(10, 20, 50, 70);
  spec.draw_number = false;
  plan.overlays.push_back(spec);
  const Image out = rasterize(plan, black);

  std::vector<bool> expected(100 * 100, false);
  for (int x = 10; x <= 49; ++x) expected[20 * 100 + x] = expected[69 * 100 + x] = true;
  for (int y = 20; y <= 69; ++y) expected[y * 100 + 10] = expected[y * 100 + 49] = true;
  EXPECT_EQ(changed(black, out), expected);
  EXPECT_EQ(out.at(10, 20), plan.style.color_for(1));
}

TEST(Rasterize, RandomBoxesMatchOutlineOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Image black(80, 60);
    RenderPlan plan;
    plan.width = 80;
    plan.height = 60;
    plan.style.box_thickness = std::uniform_int_distribution<int>(1, 5)(rng);
    OverlaySpec spec;
    spec.face_id = 1;
    spec.box = testing::random_box(rng, 80, 60, 50);
    spec.draw_number = false;
    plan.overlays.push_back(spec);
    ASSERT_EQ(changed(black, rasterize(plan, black)),
              oracle::outline_pixels(spec.box, plan.style.box_thickness, 80, 60))
        << "trial " << trial;
  }
}

TEST(Rasterize, OutOfFrameAnchorIsClamped) {
  const Image black(100, 60);
  RenderPlan plan;
  plan.width = 100;
  plan.height = 60;
  OverlaySpec spec;
  spec.face_id = 1;
  spec.box = BoundingBox::make(0, 0, 10, 10);
  spec.draw_box = false;
  spec.draw_number = false;
  spec.au_tags.push_back({12, 0.9, "AU12", {-500.0, 9000.0}, TagPlacement::kCentered});
  plan.overlays.push_back(spec);
  const Image out = rasterize(plan, black);
  const int h = 11 + 2;
  bool bottom_left_touched = false;
  for (int y = 0; y < 60; ++y) {
    for (int x = 0; x < 100; ++x) {
      if (!(out.at(x, y) == Rgb{})) {
        EXPECT_GE(y, 60 - h);
        EXPECT_LT(x, 4 * 6 + 2);
        bottom_left_touched = true;
      }
    }
  }
  EXPECT_TRUE(bottom_left_touched);
}

TEST(Rasterize, NumberSitsAboveBoxOrInsideAtTop) {
  RenderPlan plan;
  plan.width = plan.height = 100;
  OverlaySpec spec;
  spec.face_id = 7;
  spec.box = BoundingBox::make(30, 40, 70, 90);
  spec.draw_box = false;
  plan.overlays.push_back(spec);
  const auto fp = footprints(plan);
  ASSERT_EQ(fp.size(), 1u);
  EXPECT_EQ(fp[0], (PixelRect{30, 40 - 13, 30 + 8 - 1, 39}));
  plan.overlays[0].box = BoundingBox::make(30, 5, 70, 90);
  EXPECT_EQ(footprints(plan)[0], (PixelRect{30, 5, 37, 17}));
}

TEST(Rasterize, DimensionMismatchIsContractViolation) {
  RenderPlan plan;
  plan.width = 10;
  plan.height = 10;
  EXPECT_THROW(rasterize(plan, Image(10, 11)), ContractViolation);
}

TEST(Rasterize, DeterministicAndLocalOnRandomPlans) {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = std::uniform_int_distribution<int>(40, 160)(rng);
    const int h = std::uniform_int_distribution<int>(30, 120)(rng);
    const Image img = testing::gradient_image(w, h, trial);
    const RenderPlan plan = testing::random_plan(rng, w, h);
    const Image a = rasterize(plan, img), b = rasterize(plan, img);
    ASSERT_EQ(encode_png(a), encode_png(b));

    const auto diff = changed(img, a);
    const auto allowed = oracle::allowed_pixels(plan);
    const auto rects = footprints(plan);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto i = static_cast<std::size_t>(y * w + x);
        if (!diff[i]) continue;
        ASSERT_TRUE(allowed[i]) << "trial " << trial << " pixel " << x << "," << y;
        ASSERT_TRUE(std::any_of(rects.begin(), rects.end(), [&](const PixelRect& r) { return r.contains(x, y); }));
      }
    }
  }
}

TEST(Style, PaletteCyclesByFaceId) {
  Style s;
  EXPECT_EQ(s.color_for(1), s.palette[0]);
  EXPECT_EQ(s.color_for(8), s.palette[7]);
  EXPECT_EQ(s.color_for(9), s.palette[0]);
  EXPECT_NE(s.color_for(1), s.color_for(2));
}

}  // namespace
}  // namespace sovtp
