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

#include "sovtp/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "font.hpp"
#include "sovtp/errors.hpp"

namespace sovtp {

Rgb Style::color_for(int face_id) const {
  const int n = static_cast<int>(palette.size());
  return palette[static_cast<std::size_t>(((face_id - 1) % n + n) % n)];
}

std::string au_tag_text(const AuCatalogEntry& entry) {
  return "AU" + std::to_string(entry.au_id) + " " + entry.name;
}

namespace {

int text_width(const std::string& text, const Style& s) {
  return static_cast<int>(text.size()) * font::kGlyphWidth * s.font_scale + 2 * s.text_padding;
}

int text_height(const Style& s) { return font::kGlyphHeight * s.font_scale + 2 * s.text_padding; }

// Pixel extents of a box: [x_min, x_max) maps to columns floor(x_min)..ceil(x_max)-1.
PixelRect box_pixels(const BoundingBox& b) {
  const int x0 = static_cast<int>(std::floor(b.x_min()));
  const int y0 = static_cast<int>(std::floor(b.y_min()));
  const int x1 = std::max(x0, static_cast<int>(std::ceil(b.x_max())) - 1);
  const int y1 = std::max(y0, static_cast<int>(std::ceil(b.y_max())) - 1);
  return {x0, y0, x1, y1};
}

PixelRect clip(PixelRect r, int width, int height) {
  r.x0 = std::max(r.x0, 0);
  r.y0 = std::max(r.y0, 0);
  r.x1 = std::min(r.x1, width - 1);
  r.y1 = std::min(r.y1, height - 1);
  return r;
}

// Shift a w x h block so it lies inside the frame where possible.
PixelRect place_inside(int x, int y, int w, int h, int width, int height) {
  x = std::clamp(x, 0, std::max(0, width - w));
  y = std::clamp(y, 0, std::max(0, height - h));
  return {x, y, x + w - 1, y + h - 1};
}

PixelRect number_rect(const OverlaySpec& spec, const RenderPlan& plan) {
  const std::string text = std::to_string(spec.face_id);
  const int w = text_width(text, plan.style);
  const int h = text_height(plan.style);
  const PixelRect box = box_pixels(spec.box);
  int y = box.y0 - h;
  if (y < 0) y = box.y0;
  return place_inside(box.x0, y, w, h, plan.width, plan.height);
}

PixelRect tag_rect(const AuTag& tag, const RenderPlan& plan) {
  const int w = text_width(tag.text, plan.style);
  const int h = text_height(plan.style);
  const int ax = static_cast<int>(std::lround(tag.anchor.x));
  const int ay = static_cast<int>(std::lround(tag.anchor.y));
  if (tag.placement == TagPlacement::kCentered) {
    return place_inside(ax - w / 2, ay - h / 2, w, h, plan.width, plan.height);
  }
  return place_inside(ax, ay, w, h, plan.width, plan.height);
}

PixelRect dot_rect(const Point& p, const Style& s) {
  const int x = static_cast<int>(std::lround(p.x));
  const int y = static_cast<int>(std::lround(p.y));
  const int r = std::max(0, s.landmark_radius);
  return {x - r, y - r, x + r, y + r};
}

std::vector<PixelRect> outline_bands(const BoundingBox& b, int thickness) {
  const PixelRect r = box_pixels(b);
  const int t = std::max(1, thickness);
  return {
      {r.x0, r.y0, r.x1, std::min(r.y1, r.y0 + t - 1)},  // top
      {r.x0, std::max(r.y0, r.y1 - t + 1), r.x1, r.y1},  // bottom
      {r.x0, r.y0, std::min(r.x1, r.x0 + t - 1), r.y1},  // left
      {std::max(r.x0, r.x1 - t + 1), r.y0, r.x1, r.y1},  // right
  };
}

PixelRect mask_extent(const Image& mask) {
  PixelRect r{mask.width(), mask.height(), -1, -1};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const Rgb c = mask.at(x, y);
      if (c.r == 0 && c.g == 0 && c.b == 0) continue;
      r.x0 = std::min(r.x0, x);
      r.y0 = std::min(r.y0, y);
      r.x1 = std::max(r.x1, x);
      r.y1 = std::max(r.y1, y);
    }
  }
  return r;
}

class Canvas {
 public:
  explicit Canvas(Image& img) : img_(img) {}

  void fill(PixelRect r, Rgb c) {
    r = clip(r, img_.width(), img_.height());
    for (int y = r.y0; y <= r.y1; ++y) {
      for (int x = r.x0; x <= r.x1; ++x) img_.set(x, y, c);
    }
  }

  void text(PixelRect block, const std::string& s, const Style& style, Rgb fg, Rgb bg) {
    fill(block, bg);
    const int scale = std::max(1, style.font_scale);
    int pen_x = block.x0 + style.text_padding;
    const int pen_y = block.y0 + style.text_padding;
    for (char ch : s) {
      const auto& g = font::glyph(ch);
      for (int gy = 0; gy < font::kGlyphHeight; ++gy) {
        for (int gx = 0; gx < font::kGlyphWidth; ++gx) {
          if ((g[static_cast<std::size_t>(gy)] >> (font::kGlyphWidth - 1 - gx) & 1) == 0) continue;
          fill({pen_x + gx * scale, pen_y + gy * scale, pen_x + (gx + 1) * scale - 1,
                pen_y + (gy + 1) * scale - 1},
               fg);
        }
      }
      pen_x += font::kGlyphWidth * scale;
    }
  }

  void blend_mask(const Image& mask, Rgb c, int alpha) {
    const int a = std::clamp(alpha, 0, 255);
    for (int y = 0; y < img_.height(); ++y) {
      for (int x = 0; x < img_.width(); ++x) {
        const Rgb m = mask.at(x, y);
        if (m.r == 0 && m.g == 0 && m.b == 0) continue;
        const Rgb p = img_.at(x, y);
        auto mix = [a](int fg, int bgv) {
          return static_cast<std::uint8_t>((fg * a + bgv * (255 - a) + 127) / 255);
        };
        img_.set(x, y, {mix(c.r, p.r), mix(c.g, p.g), mix(c.b, p.b)});
      }
    }
  }

 private:
  Image& img_;
};

Rgb contrasting_text(Rgb bg) {
  const int luma = (299 * bg.r + 587 * bg.g + 114 * bg.b) / 1000;
  return luma > 150 ? Rgb{0, 0, 0} : Rgb{255, 255, 255};
}

}  // namespace

RenderPlan plan_overlays(int frame_index, const std::vector<TrackedFace>& tracks,
                         const std::map<int, RankedAUs>& ranked, const AuCatalog& catalog,
                         const RenderOptions& opts, int width, int height,
                         const MaskLoader& load_mask) {
  if (width <= 0 || height <= 0) throw ContractViolation("plan_overlays: frame size must be positive");
  RenderPlan plan;
  plan.frame_index = frame_index;
  plan.width = width;
  plan.height = height;
  plan.style = opts.style;

  std::vector<const TrackedFace*> ordered;
  for (const auto& t : tracks) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const TrackedFace* a, const TrackedFace* b) { return a->face_id < b->face_id; });

  const int line_height = text_height(opts.style);
  for (const TrackedFace* track : ordered) {
    auto obs_it = track->observations.find(frame_index);
    if (obs_it == track->observations.end()) continue;
    const FaceObservation& obs = obs_it->second;

    OverlaySpec spec;
    spec.face_id = track->face_id;
    spec.box = obs.box;
    spec.draw_box = opts.layers.boxes;
    spec.draw_number = opts.layers.numbers;
    const bool has_landmarks = obs.landmarks.size() == kLandmarkCount;
    if (opts.layers.landmarks && has_landmarks) spec.landmarks = obs.landmarks;

    if (opts.layers.au_tags) {
      if (auto r = ranked.find(track->face_id); r != ranked.end()) {
        int stacked = 0;
        for (const auto& au : r->second) {
          const auto& entry = catalog.at(au.au_id);
          AuTag tag;
          tag.au_id = au.au_id;
          tag.score = au.score;
          tag.text = au_tag_text(entry);
          if (has_landmarks) {
            tag.anchor = catalog.au_anchor(au.au_id, obs.landmarks);
            tag.placement = TagPlacement::kCentered;
          } else {
            tag.anchor = {obs.box.x_min(), obs.box.y_min() + stacked * line_height};
            tag.placement = TagPlacement::kTopLeft;
            ++stacked;
          }
          spec.au_tags.push_back(std::move(tag));
        }
      }
    }

    if (opts.layers.masks && !obs.body_mask.empty() && load_mask) {
      spec.mask = load_mask(obs.body_mask);
      if (spec.mask && (spec.mask->width() != width || spec.mask->height() != height)) {
        throw DataError("body mask '" + obs.body_mask + "' does not match the frame size");
      }
    }
    plan.overlays.push_back(std::move(spec));
  }
  return plan;
}

Image rasterize(const RenderPlan& plan, const Image& image) {
  if (image.width() != plan.width || image.height() != plan.height) {
    throw ContractViolation("rasterize: image is " + std::to_string(image.width()) + "x" +
                            std::to_string(image.height()) + " but the plan expects " +
                            std::to_string(plan.width) + "x" + std::to_string(plan.height));
  }
  Image out = image;
  Canvas canvas(out);
  const Style& style = plan.style;

  for (const auto& spec : plan.overlays) {
    if (spec.mask) canvas.blend_mask(*spec.mask, style.color_for(spec.face_id), style.mask_alpha);
  }
  for (const auto& spec : plan.overlays) {
    if (!spec.draw_box) continue;
    for (const auto& band : outline_bands(spec.box, style.box_thickness)) {
      canvas.fill(band, style.color_for(spec.face_id));
    }
  }
  for (const auto& spec : plan.overlays) {
    for (const auto& p : spec.landmarks) canvas.fill(dot_rect(p, style), style.color_for(spec.face_id));
  }
  for (const auto& spec : plan.overlays) {
    for (const auto& tag : spec.au_tags) {
      canvas.text(tag_rect(tag, plan), tag.text, style, style.color_for(spec.face_id),
                  style.tag_background);
    }
  }
  for (const auto& spec : plan.overlays) {
    if (!spec.draw_number) continue;
    const Rgb bg = style.color_for(spec.face_id);
    canvas.text(number_rect(spec, plan), std::to_string(spec.face_id), style, contrasting_text(bg), bg);
  }
  return out;
}

std::vector<PixelRect> footprints(const RenderPlan& plan) {
  std::vector<PixelRect> rects;
  auto add = [&](PixelRect r) {
    r = clip(r, plan.width, plan.height);
    if (!r.empty()) rects.push_back(r);
  };
  for (const auto& spec : plan.overlays) {
    if (spec.mask) add(mask_extent(*spec.mask));
    if (spec.draw_box) {
      for (const auto& band : outline_bands(spec.box, plan.style.box_thickness)) add(band);
    }
    for (const auto& p : spec.landmarks) add(dot_rect(p, plan.style));
    for (const auto& tag : spec.au_tags) add(tag_rect(tag, plan));
    if (spec.draw_number) add(number_rect(spec, plan));
  }
  return rects;
}

}  // namespace sovtp
