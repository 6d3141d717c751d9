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

#include "sovtp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include "sovtp/errors.hpp"

namespace sovtp {

BoundingBox BoundingBox::make(double x_min, double y_min, double x_max, double y_max) {
  const bool finite = std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
                      std::isfinite(y_max);
  if (!finite || x_min < 0.0 || y_min < 0.0 || !(x_min < x_max) || !(y_min < y_max)) {
    std::ostringstream msg;
    msg << "invalid bounding box (" << x_min << ", " << y_min << ", " << x_max << ", " << y_max
        << "): requires 0 <= x_min < x_max and 0 <= y_min < y_max";
    throw ContractViolation(msg.str());
  }
  return BoundingBox(x_min, y_min, x_max, y_max);
}

BoundingBox BoundingBox::scaled(double sx, double sy) const {
  return make(x_min_ * sx, y_min_ * sy, x_max_ * sx, y_max_ * sy);
}

double area(const BoundingBox& b) noexcept { return b.width() * b.height(); }

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double overlap_ratio(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  return std::clamp(inter / std::min(area(a), area(b)), 0.0, 1.0);
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  return std::clamp(inter / (area(a) + area(b) - inter), 0.0, 1.0);
}

std::vector<std::size_t> resolve_overlap_indices(std::span<const BoundingBox> boxes, double epsilon,
                                                 OverlapCheck check) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ContractViolation("epsilon must lie in [0, 1]");
  }
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
    return area(boxes[lhs]) > area(boxes[rhs]);
  });

  std::vector<std::size_t> kept;
  kept.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const BoundingBox& candidate = boxes[order[k]];
    bool accept = true;
    if (check == OverlapCheck::kAllAccepted) {
      accept = std::all_of(kept.begin(), kept.end(), [&](std::size_t j) {
        return overlap_ratio(candidate, boxes[j]) <= epsilon;
      });
    } else if (k > 0) {
      accept = overlap_ratio(candidate, boxes[order[k - 1]]) <= epsilon;
    }
    if (accept) kept.push_back(order[k]);
  }
  return kept;
}

std::vector<FaceObservation> resolve_overlaps(std::span<const FaceObservation> faces, double epsilon,
                                              OverlapCheck check) {
  std::vector<BoundingBox> boxes;
  boxes.reserve(faces.size());
  for (const auto& f : faces) boxes.push_back(f.box);

  std::vector<FaceObservation> kept;
  for (std::size_t i : resolve_overlap_indices(boxes, epsilon, check)) kept.push_back(faces[i]);
  return kept;
}

std::vector<TrackedFace> assign_ids(const std::vector<FrameFaces>& per_frame_kept,
                                    double iou_threshold) {
  for (std::size_t i = 1; i < per_frame_kept.size(); ++i) {
    if (per_frame_kept[i].first <= per_frame_kept[i - 1].first) {
      throw ContractViolation("assign_ids: frames must be in strictly ascending order");
    }
  }

  std::vector<TrackedFace> tracks;
  // Track index (into `tracks`) for each face of the previous frame entry.
  std::vector<std::size_t> previous_tracks;
  const std::vector<FaceObservation>* previous_faces = nullptr;

  for (const auto& [frame_index, faces] : per_frame_kept) {
    std::vector<std::optional<std::size_t>> assignment(faces.size());

    if (previous_faces != nullptr && !previous_faces->empty() && !faces.empty()) {
      struct Candidate {
        double score;
        std::size_t track;
        std::size_t prev;
        std::size_t cur;
      };
      std::vector<Candidate> candidates;
      for (std::size_t p = 0; p < previous_faces->size(); ++p) {
        for (std::size_t c = 0; c < faces.size(); ++c) {
          const double score = iou((*previous_faces)[p].box, faces[c].box);
          if (score >= iou_threshold && score > 0.0) {
            candidates.push_back({score, previous_tracks[p], p, c});
          }
        }
      }
      // Highest IoU first; ties resolved by lower track id, then face order.
      std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (tracks[a.track].face_id != tracks[b.track].face_id) {
          return tracks[a.track].face_id < tracks[b.track].face_id;
        }
        return a.cur < b.cur;
      });
      std::vector<bool> prev_used(previous_faces->size(), false);
      for (const auto& cand : candidates) {
        if (prev_used[cand.prev] || assignment[cand.cur]) continue;
        prev_used[cand.prev] = true;
        assignment[cand.cur] = cand.track;
      }
    }

    std::vector<std::size_t> current_tracks(faces.size());
    for (std::size_t c = 0; c < faces.size(); ++c) {
      std::size_t track_index;
      if (assignment[c]) {
        track_index = *assignment[c];
      } else {
        track_index = tracks.size();
        tracks.push_back(TrackedFace{static_cast<int>(tracks.size()) + 1, {}});
      }
      tracks[track_index].observations.emplace(frame_index, faces[c]);
      current_tracks[c] = track_index;
    }
    previous_tracks = std::move(current_tracks);
    previous_faces = &faces;
  }
  return tracks;
}

}  // namespace sovtp
