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
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sovtp/au_catalog.hpp"
#include "sovtp/geometry.hpp"
#include "sovtp/image.hpp"

namespace sovtp {

struct Style {
  int box_thickness = 2;
  int font_scale = 1;
  int landmark_radius = 1;
  int text_padding = 1;
  int mask_alpha = 96;  // 0..255 blend weight of the face color over the mask
  std::array<Rgb, 8> palette = {{
      {230, 25, 75}, {60, 180, 75}, {255, 225, 25}, {0, 130, 200},
      {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230},
  }};
  Rgb tag_background{0, 0, 0};

  Rgb color_for(int face_id) const;
};

struct LayerToggles {
  bool boxes = true;
  bool numbers = true;
  bool landmarks = true;
  bool au_tags = true;
  bool masks = false;
};

struct RenderOptions {
  LayerToggles layers;
  Style style;
};

enum class TagPlacement {
  kCentered,  // tag block centered on the landmark centroid
  kTopLeft,   // tag block's top-left at the anchor (box-corner fallback)
};

struct AuTag {
  int au_id = 0;
  double score = 0.0;
  std::string text;  // "AU12 Lip Corner Puller"
  Point anchor;
  TagPlacement placement = TagPlacement::kCentered;
};

struct OverlaySpec {
  int face_id = 0;
  BoundingBox box = BoundingBox::make(0, 0, 1, 1);
  bool draw_box = true;
  bool draw_number = true;
  std::vector<Point> landmarks;  // empty when the layer is off or no landmarks
  std::vector<AuTag> au_tags;
  std::shared_ptr<const Image> mask;  // nonzero pixels mark the body region
};

struct RenderPlan {
  int frame_index = 0;
  int width = 0;
  int height = 0;
  Style style;
  std::vector<OverlaySpec> overlays;  // ascending face_id
};

// Resolves a sidecar body-mask reference to a raster of the frame's size.
using MaskLoader = std::function<std::shared_ptr<const Image>(const std::string& ref)>;

std::string au_tag_text(const AuCatalogEntry& entry);

// One OverlaySpec per track visible at `frame_index`, ordered by face_id.
// AU tags are anchored at the landmark centroid of each AU, or stacked at the
// box's top-left corner when the face has no landmarks.
RenderPlan plan_overlays(int frame_index, const std::vector<TrackedFace>& tracks,
                         const std::map<int, RankedAUs>& ranked, const AuCatalog& catalog,
                         const RenderOptions& opts, int width, int height,
                         const MaskLoader& load_mask = {});

// Returns a copy of `image` with the plan drawn on it. Pixels outside the
// plan's primitives are left untouched.
Image rasterize(const RenderPlan& plan, const Image& image);

// Inclusive pixel rectangle.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  bool empty() const noexcept { return x1 < x0 || y1 < y0; }
  bool contains(int x, int y) const noexcept { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

// Rectangles that together cover every pixel rasterize() may modify.
std::vector<PixelRect> footprints(const RenderPlan& plan);

}  // namespace sovtp
