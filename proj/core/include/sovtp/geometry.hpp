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

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sovtp/emotion.hpp"

namespace sovtp {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned face box in pixel coordinates, origin top-left.
// Construct through make() to enforce x_min < x_max, y_min < y_max and
// non-negative coordinates.
class BoundingBox {
 public:
  static BoundingBox make(double x_min, double y_min, double x_max, double y_max);

  double x_min() const noexcept { return x_min_; }
  double y_min() const noexcept { return y_min_; }
  double x_max() const noexcept { return x_max_; }
  double y_max() const noexcept { return y_max_; }
  double width() const noexcept { return x_max_ - x_min_; }
  double height() const noexcept { return y_max_ - y_min_; }

  BoundingBox scaled(double sx, double sy) const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  BoundingBox(double x_min, double y_min, double x_max, double y_max)
      : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {}

  double x_min_;
  double y_min_;
  double x_max_;
  double y_max_;
};

inline constexpr std::size_t kLandmarkCount = 68;

struct FaceObservation {
  int frame_index = 0;
  BoundingBox box = BoundingBox::make(0, 0, 1, 1);
  std::vector<Point> landmarks;  // empty, or exactly kLandmarkCount points
  std::map<int, double> au_scores;
  std::optional<EmotionLabel> dominant_emotion_hint;
  double confidence = 1.0;
  std::string body_mask;  // optional mask raster reference, empty if none

  friend bool operator==(const FaceObservation&, const FaceObservation&) = default;
};

struct TrackedFace {
  int face_id = 0;
  std::map<int, FaceObservation> observations;  // keyed by frame_index
};

double area(const BoundingBox& b) noexcept;
double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept;

// Area(a ∩ b) / min(Area(a), Area(b)). Symmetric, in [0, 1].
double overlap_ratio(const BoundingBox& a, const BoundingBox& b) noexcept;

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

enum class OverlapCheck {
  // A candidate must clear every face already accepted.
  kAllAccepted,
  // Compatibility mode: a candidate is compared only against its immediate
  // predecessor in area order, whether or not that predecessor was kept.
  kAdjacentPair,
};

inline constexpr double kDefaultEpsilon = 0.0;
inline constexpr double kDefaultIouThreshold = 0.3;

// Indices into `boxes` of the kept set, in kept (area-descending) order.
// Equal areas keep input order.
std::vector<std::size_t> resolve_overlap_indices(std::span<const BoundingBox> boxes, double epsilon,
                                                 OverlapCheck check = OverlapCheck::kAllAccepted);

// Occlusion filter for one frame: larger faces win; a face survives only if
// its overlap ratio with the accepted faces is <= epsilon.
std::vector<FaceObservation> resolve_overlaps(std::span<const FaceObservation> faces, double epsilon,
                                              OverlapCheck check = OverlapCheck::kAllAccepted);

using FrameFaces = std::pair<int, std::vector<FaceObservation>>;

// Greedy highest-IoU matching between consecutive entries of
// `per_frame_kept`. Unmatched faces open a new track; IDs start at 1 and are
// dense. Tracks are never resumed after a gap.
std::vector<TrackedFace> assign_ids(const std::vector<FrameFaces>& per_frame_kept,
                                    double iou_threshold = kDefaultIouThreshold);

}  // namespace sovtp
